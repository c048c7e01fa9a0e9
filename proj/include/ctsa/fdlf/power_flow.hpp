#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCore>

#include "ctsa/grid/network.hpp"

namespace ctsa {

class PowerFlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PowerFlowOptions {
  double tolerance = 1e-6;       // pu, infinity norm of the power mismatch
  int max_half_iterations = 60;  // one P-theta or Q-V solve each
  bool flat_start = false;
  bool enforce_q_limits = true;
};

// Reactive-limit state of a generator bus in the converged solution.
enum class QLimit : signed char { none = 0, at_max = 1, at_min = -1 };

struct PowerFlowSolution {
  // Per bus, indexed like Network::buses(). De-energized buses have v = 0.
  std::vector<double> v;
  std::vector<double> theta;
  std::vector<QLimit> q_limit;
  std::vector<double> q_gen;  // MVAr supplied at generator buses (0 elsewhere)
  std::vector<bool> energized;

  // Per branch, indexed like Network::branches(); MVA.
  std::vector<std::complex<double>> s_from;
  std::vector<std::complex<double>> s_to;

  bool converged = false;
  int half_iterations_used = 0;
  double max_p_mismatch = 0.0;  // pu
  double max_q_mismatch = 0.0;  // pu
  double slack_p = 0.0;         // MW produced at the slack bus
  double losses_mw = 0.0;
};

// B' (P-theta, non-slack energized buses) and B'' (Q-V, PQ buses), XB scheme.
// Holds the sparse matrices and their LDL^T factorizations.
class DecoupledMatrices {
 public:
  DecoupledMatrices(const Network& net, std::vector<std::size_t> angle_buses,
                    std::vector<std::size_t> magnitude_buses);
  DecoupledMatrices(DecoupledMatrices&&) noexcept;
  DecoupledMatrices& operator=(DecoupledMatrices&&) noexcept;
  ~DecoupledMatrices();

  // Bus indices (into Network::buses()) in matrix row order.
  const std::vector<std::size_t>& angle_buses() const { return angle_buses_; }
  const std::vector<std::size_t>& magnitude_buses() const { return magnitude_buses_; }

  const Eigen::SparseMatrix<double>& b_prime() const { return b_prime_; }
  const Eigen::SparseMatrix<double>& b_double_prime() const { return b_double_prime_; }

  Eigen::VectorXd solve_angle(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd solve_magnitude(const Eigen::VectorXd& rhs) const;

  // Replaces B'' for a new PQ set (after PV/PQ switching).
  void rebuild_magnitude(const Network& net, std::vector<std::size_t> pq_buses);

 private:
  struct Factors;
  std::vector<bool> energized_;
  std::vector<std::size_t> angle_buses_;
  std::vector<std::size_t> magnitude_buses_;
  Eigen::SparseMatrix<double> b_prime_;
  Eigen::SparseMatrix<double> b_double_prime_;
  std::unique_ptr<Factors> factors_;
};

// Builds and factorizes B' and B'' for the energized island of the slack bus
// using the case bus kinds. `energized` may be supplied to skip the island search.
DecoupledMatrices build_decoupled_matrices(const Network& net,
                                           const std::vector<bool>* energized = nullptr);

PowerFlowSolution solve_power_flow(const Network& net, const PowerFlowOptions& opts = {},
                                   const PowerFlowSolution* warm_start = nullptr);

struct BranchFlows {
  std::vector<std::complex<double>> s_from;  // MVA
  std::vector<std::complex<double>> s_to;    // MVA
  double losses_mw = 0.0;
};

// Pi-model flows at both ends including tap, phase shift and charging.
BranchFlows compute_branch_flows(const Network& net, const PowerFlowSolution& sol);

// Buses reachable from the slack over in-service branches.
std::vector<bool> energized_buses(const Network& net);

}  // namespace ctsa
