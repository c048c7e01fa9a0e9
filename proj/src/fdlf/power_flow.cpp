#include "ctsa/fdlf/power_flow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include <Eigen/SparseCholesky>

#include "admittance.hpp"

namespace ctsa {

using detail::Complex;

namespace detail {

Eigen::SparseMatrix<Complex> build_ybus(const Network& net, const BusNumbering& num) {
  const auto n = static_cast<Eigen::Index>(num.active.size());
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(4 * net.branch_count() + num.active.size());
  for (const auto& br : net.branches()) {
    if (!branch_active(net, num, br)) continue;
    const int f = num.position[net.bus_index(br.from_bus)];
    const int t = num.position[net.bus_index(br.to_bus)];
    const auto y = branch_admittance(br);
    trip.emplace_back(f, f, y.yff);
    trip.emplace_back(f, t, y.yft);
    trip.emplace_back(t, f, y.ytf);
    trip.emplace_back(t, t, y.ytt);
  }
  for (std::size_t p = 0; p < num.active.size(); ++p) {
    const auto& bus = net.buses()[num.active[p]];
    if (bus.shunt_g != 0.0 || bus.shunt_b != 0.0) {
      trip.emplace_back(static_cast<int>(p), static_cast<int>(p), Complex(bus.shunt_g, bus.shunt_b));
    }
  }
  Eigen::SparseMatrix<Complex> y(n, n);
  y.setFromTriplets(trip.begin(), trip.end());
  return y;
}

}  // namespace detail

namespace {

using Ldlt = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

// Rows of the returned matrix follow `rows` (bus indices); entries between
// buses outside `rows` are dropped.
Eigen::SparseMatrix<double> assemble_b(const Network& net, const std::vector<bool>& energized,
                                       const std::vector<std::size_t>& rows, bool prime) {
  std::vector<int> row_of(net.bus_count(), -1);
  for (std::size_t r = 0; r < rows.size(); ++r) row_of[rows[r]] = static_cast<int>(r);

  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& br : net.branches()) {
    if (!br.in_service) continue;
    const auto fi = net.bus_index(br.from_bus);
    const auto ti = net.bus_index(br.to_bus);
    if (!energized[fi] || !energized[ti]) continue;
    const int f = row_of[fi];
    const int t = row_of[ti];
    if (f < 0 && t < 0) continue;
    double bff, bft, btf, btt;
    if (prime) {
      // XB: resistance, charging, taps and shifts neglected.
      bff = btt = 1.0 / br.x;
      bft = btf = -1.0 / br.x;
    } else {
      // B'' = -Im(Ybus) with phase shifts removed.
      Branch no_shift = br;
      no_shift.phase_shift = 0.0;
      const auto y = detail::branch_admittance(no_shift);
      bff = -y.yff.imag();
      bft = -y.yft.imag();
      btf = -y.ytf.imag();
      btt = -y.ytt.imag();
    }
    if (f >= 0) trip.emplace_back(f, f, bff);
    if (t >= 0) trip.emplace_back(t, t, btt);
    if (f >= 0 && t >= 0) {
      trip.emplace_back(f, t, bft);
      trip.emplace_back(t, f, btf);
    }
  }
  if (!prime) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const double bsh = net.buses()[rows[r]].shunt_b;
      if (bsh != 0.0) trip.emplace_back(static_cast<int>(r), static_cast<int>(r), -bsh);
    }
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace

struct DecoupledMatrices::Factors {
  Ldlt angle;
  Ldlt magnitude;
};

DecoupledMatrices::DecoupledMatrices(const Network& net, std::vector<std::size_t> angle_buses,
                                     std::vector<std::size_t> magnitude_buses)
    : angle_buses_(std::move(angle_buses)), factors_(std::make_unique<Factors>()) {
  energized_ = energized_buses(net);
  b_prime_ = assemble_b(net, energized_, angle_buses_, true);
  if (b_prime_.rows() > 0) {
    factors_->angle.compute(b_prime_);
    if (factors_->angle.info() != Eigen::Success) {
      throw PowerFlowError("singular B' matrix (disconnected or degenerate island)");
    }
  }
  rebuild_magnitude(net, std::move(magnitude_buses));
}

DecoupledMatrices::DecoupledMatrices(DecoupledMatrices&&) noexcept = default;
DecoupledMatrices& DecoupledMatrices::operator=(DecoupledMatrices&&) noexcept = default;
DecoupledMatrices::~DecoupledMatrices() = default;

void DecoupledMatrices::rebuild_magnitude(const Network& net, std::vector<std::size_t> pq_buses) {
  magnitude_buses_ = std::move(pq_buses);
  b_double_prime_ = assemble_b(net, energized_, magnitude_buses_, false);
  if (b_double_prime_.rows() > 0) {
    factors_->magnitude.compute(b_double_prime_);
    if (factors_->magnitude.info() != Eigen::Success) {
      throw PowerFlowError("singular B'' matrix");
    }
  }
}

Eigen::VectorXd DecoupledMatrices::solve_angle(const Eigen::VectorXd& rhs) const {
  return factors_->angle.solve(rhs);
}

Eigen::VectorXd DecoupledMatrices::solve_magnitude(const Eigen::VectorXd& rhs) const {
  return factors_->magnitude.solve(rhs);
}

std::vector<bool> energized_buses(const Network& net) {
  std::vector<bool> on(net.bus_count(), false);
  auto slack = net.slack_index();
  if (!slack) return on;
  std::vector<std::vector<std::size_t>> adj(net.bus_count());
  for (const auto& br : net.branches()) {
    if (!br.in_service) continue;
    auto f = net.bus_index(br.from_bus);
    auto t = net.bus_index(br.to_bus);
    adj[f].push_back(t);
    adj[t].push_back(f);
  }
  std::deque<std::size_t> queue{*slack};
  on[*slack] = true;
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    for (auto w : adj[u]) {
      if (!on[w] && net.buses()[w].kind != BusKind::isolated) {
        on[w] = true;
        queue.push_back(w);
      }
    }
  }
  return on;
}

DecoupledMatrices build_decoupled_matrices(const Network& net, const std::vector<bool>* energized) {
  std::vector<bool> own;
  if (!energized) {
    own = energized_buses(net);
    energized = &own;
  }
  std::vector<std::size_t> angle, magnitude;
  for (std::size_t i = 0; i < net.bus_count(); ++i) {
    if (!(*energized)[i]) continue;
    const auto kind = net.buses()[i].kind;
    if (kind == BusKind::slack) continue;
    angle.push_back(i);
    if (kind == BusKind::pq) magnitude.push_back(i);
  }
  return DecoupledMatrices(net, std::move(angle), std::move(magnitude));
}

namespace {

constexpr double kLimitCheckMismatch = 1e-3;  // pu; Q limits are checked near the solution only

struct BusTotals {
  std::vector<double> p_gen, q_gen, q_max, q_min;  // MW / MVAr
  std::vector<bool> has_gen;
};

BusTotals generator_totals(const Network& net) {
  const auto n = net.bus_count();
  BusTotals t{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
              std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
              std::vector<bool>(n, false)};
  for (const auto& g : net.generators()) {
    if (!g.in_service) continue;
    auto i = net.bus_index(g.bus);
    t.p_gen[i] += g.p;
    t.q_gen[i] += g.q;
    t.q_max[i] += g.q_max;
    t.q_min[i] += g.q_min;
    t.has_gen[i] = true;
  }
  return t;
}

class FastDecoupledSolver {
 public:
  FastDecoupledSolver(const Network& net, const PowerFlowOptions& opts,
                      const PowerFlowSolution* warm)
      : net_(net), opts_(opts), totals_(generator_totals(net)) {
    energized_ = energized_buses(net);
    num_ = detail::number_buses(energized_);
    ybus_ = detail::build_ybus(net, num_);

    const auto n = net.bus_count();
    kind_.resize(n);
    limit_.assign(n, QLimit::none);
    reversions_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) kind_[i] = net.buses()[i].kind;

    v_.assign(n, 1.0);
    theta_.assign(n, 0.0);
    if (warm) {
      if (warm->v.size() != n || warm->theta.size() != n) {
        throw PowerFlowError("warm start does not match the network bus set");
      }
      for (std::size_t i = 0; i < n; ++i) {
        v_[i] = warm->v[i] > 0.0 ? warm->v[i] : 1.0;
        theta_[i] = warm->theta[i];
        if (opts.enforce_q_limits && kind_[i] == BusKind::pv && i < warm->q_limit.size()) {
          limit_[i] = warm->q_limit[i];
        }
      }
    } else if (!opts.flat_start) {
      for (std::size_t i = 0; i < n; ++i) {
        v_[i] = net.buses()[i].v_init;
        theta_[i] = net.buses()[i].theta_init;
      }
    }
    // The slack keeps its case angle as the reference.
    const auto slack = *net.slack_index();
    const double reference = net.buses()[slack].theta_init;
    if (!warm && opts.flat_start) std::fill(theta_.begin(), theta_.end(), reference);
    theta_[slack] = reference;
    for (std::size_t i = 0; i < n; ++i) {
      if (regulated(i)) v_[i] = net.buses()[i].v_setpoint;
    }
    matrices_.emplace(net, angle_rows(), magnitude_rows());
  }

  PowerFlowSolution run() {
    PowerFlowSolution sol;
    int half = 0;
    bool converged = false;
    auto settle = [&] {
      if (!within_tolerance()) return false;
      if (opts_.enforce_q_limits && update_q_limits()) {
        matrices_->rebuild_magnitude(net_, magnitude_rows());
        compute_mismatch();
        return false;
      }
      return true;
    };

    compute_mismatch();
    converged = settle();
    while (!converged && half < opts_.max_half_iterations && finite()) {
      angle_step();
      ++half;
      compute_mismatch();
      if ((converged = settle())) break;
      if (half >= opts_.max_half_iterations || !finite()) break;

      if (!matrices_->magnitude_buses().empty()) {
        magnitude_step();
        ++half;
        compute_mismatch();
        if ((converged = settle())) break;
      }
      if (opts_.enforce_q_limits && std::max(max_p_, max_q_) <= kLimitCheckMismatch &&
          update_q_limits()) {
        matrices_->rebuild_magnitude(net_, magnitude_rows());
        compute_mismatch();
      }
    }

    sol.converged = converged;
    sol.half_iterations_used = half;
    sol.max_p_mismatch = max_p_;
    sol.max_q_mismatch = max_q_;
    sol.v.assign(net_.bus_count(), 0.0);
    sol.theta.assign(net_.bus_count(), 0.0);
    sol.q_gen.assign(net_.bus_count(), 0.0);
    sol.q_limit = limit_;
    sol.energized = energized_;
    for (std::size_t i = 0; i < net_.bus_count(); ++i) {
      if (!energized_[i]) continue;
      sol.v[i] = v_[i];
      sol.theta[i] = theta_[i];
      const int p = num_.position[i];
      const auto& bus = net_.buses()[i];
      if (totals_.has_gen[i]) sol.q_gen[i] = injection_[p].imag() * net_.base_mva + bus.q_load;
      if (bus.kind == BusKind::slack) {
        sol.slack_p = injection_[p].real() * net_.base_mva + bus.p_load;
      }
    }
    auto flows = compute_branch_flows(net_, sol);
    sol.s_from = std::move(flows.s_from);
    sol.s_to = std::move(flows.s_to);
    sol.losses_mw = flows.losses_mw;
    return sol;
  }

 private:
  bool regulated(std::size_t i) const {
    return kind_[i] == BusKind::slack || (kind_[i] == BusKind::pv && limit_[i] == QLimit::none);
  }

  std::vector<std::size_t> angle_rows() const {
    std::vector<std::size_t> rows;
    for (auto i : num_.active) {
      if (kind_[i] != BusKind::slack) rows.push_back(i);
    }
    return rows;
  }

  std::vector<std::size_t> magnitude_rows() const {
    std::vector<std::size_t> rows;
    for (auto i : num_.active) {
      if (kind_[i] == BusKind::pq || (kind_[i] == BusKind::pv && limit_[i] != QLimit::none)) {
        rows.push_back(i);
      }
    }
    return rows;
  }

  // Scheduled injection in pu; Q only meaningful for magnitude rows.
  Complex scheduled(std::size_t i) const {
    const auto& bus = net_.buses()[i];
    double q = totals_.q_gen[i];
    if (limit_[i] == QLimit::at_max) q = totals_.q_max[i];
    if (limit_[i] == QLimit::at_min) q = totals_.q_min[i];
    return Complex(totals_.p_gen[i] - bus.p_load, q - bus.q_load) / net_.base_mva;
  }

  void compute_mismatch() {
    const auto m = num_.active.size();
    Eigen::VectorXcd vc(static_cast<Eigen::Index>(m));
    for (std::size_t p = 0; p < m; ++p) vc[p] = std::polar(v_[num_.active[p]], theta_[num_.active[p]]);
    Eigen::VectorXcd current = ybus_ * vc;
    injection_.resize(m);
    for (std::size_t p = 0; p < m; ++p) injection_[p] = vc[p] * std::conj(current[p]);

    const auto& arows = matrices_->angle_buses();
    const auto& mrows = matrices_->magnitude_buses();
    dp_.resize(static_cast<Eigen::Index>(arows.size()));
    dq_.resize(static_cast<Eigen::Index>(mrows.size()));
    max_p_ = max_q_ = 0.0;
    for (std::size_t r = 0; r < arows.size(); ++r) {
      const auto i = arows[r];
      const double mis = injection_[num_.position[i]].real() - scheduled(i).real();
      max_p_ = std::max(max_p_, std::abs(mis));
      dp_[static_cast<Eigen::Index>(r)] = mis / v_[i];
    }
    for (std::size_t r = 0; r < mrows.size(); ++r) {
      const auto i = mrows[r];
      const double mis = injection_[num_.position[i]].imag() - scheduled(i).imag();
      max_q_ = std::max(max_q_, std::abs(mis));
      dq_[static_cast<Eigen::Index>(r)] = mis / v_[i];
    }
    if (!std::isfinite(max_p_) || !std::isfinite(max_q_)) diverged_ = true;
  }

  bool within_tolerance() const {
    return !diverged_ && max_p_ <= opts_.tolerance && max_q_ <= opts_.tolerance;
  }

  bool finite() const { return !diverged_ && max_p_ < 1e6 && max_q_ < 1e6; }

  void angle_step() {
    if (dp_.size() == 0) return;
    Eigen::VectorXd d = matrices_->solve_angle(dp_);
    const auto& rows = matrices_->angle_buses();
    for (std::size_t r = 0; r < rows.size(); ++r) theta_[rows[r]] -= d[static_cast<Eigen::Index>(r)];
  }

  void magnitude_step() {
    if (dq_.size() == 0) return;
    Eigen::VectorXd d = matrices_->solve_magnitude(dq_);
    const auto& rows = matrices_->magnitude_buses();
    for (std::size_t r = 0; r < rows.size(); ++r) v_[rows[r]] -= d[static_cast<Eigen::Index>(r)];
  }

  // PV buses outside their reactive range become PQ at the violated limit;
  // a limited bus whose voltage crosses back over its setpoint returns to PV
  // once. Returns true when any bus changed.
  bool update_q_limits() {
    bool changed = false;
    const double slop = opts_.tolerance * net_.base_mva;
    for (auto i : num_.active) {
      if (kind_[i] != BusKind::pv) continue;
      const auto& bus = net_.buses()[i];
      if (limit_[i] == QLimit::none) {
        const double q = injection_[num_.position[i]].imag() * net_.base_mva + bus.q_load;
        if (q > totals_.q_max[i] + slop) {
          limit_[i] = QLimit::at_max;
          changed = true;
        } else if (q < totals_.q_min[i] - slop) {
          limit_[i] = QLimit::at_min;
          changed = true;
        }
      } else if (reversions_[i] == 0) {
        const bool back = limit_[i] == QLimit::at_max ? v_[i] > bus.v_setpoint
                                                      : v_[i] < bus.v_setpoint;
        if (back) {
          limit_[i] = QLimit::none;
          v_[i] = bus.v_setpoint;
          ++reversions_[i];
          changed = true;
        }
      }
    }
    return changed;
  }

  const Network& net_;
  PowerFlowOptions opts_;
  BusTotals totals_;
  std::vector<bool> energized_;
  detail::BusNumbering num_;
  Eigen::SparseMatrix<Complex> ybus_;
  std::vector<BusKind> kind_;
  std::vector<QLimit> limit_;
  std::vector<int> reversions_;
  std::vector<double> v_, theta_;
  std::optional<DecoupledMatrices> matrices_;
  std::vector<Complex> injection_;
  Eigen::VectorXd dp_, dq_;
  double max_p_ = 0.0, max_q_ = 0.0;
  bool diverged_ = false;
};

}  // namespace

PowerFlowSolution solve_power_flow(const Network& net, const PowerFlowOptions& opts,
                                   const PowerFlowSolution* warm_start) {
  if (!(opts.tolerance > 0.0)) throw PowerFlowError("tolerance must be positive");
  if (opts.max_half_iterations < 2) throw PowerFlowError("max_half_iterations must be >= 2");
  if (!net.slack_index()) throw PowerFlowError("network has no slack bus");
  return FastDecoupledSolver(net, opts, warm_start).run();
}

BranchFlows compute_branch_flows(const Network& net, const PowerFlowSolution& sol) {
  BranchFlows out;
  out.s_from.assign(net.branch_count(), Complex{});
  out.s_to.assign(net.branch_count(), Complex{});
  for (std::size_t k = 0; k < net.branch_count(); ++k) {
    const auto& br = net.branches()[k];
    if (!br.in_service) continue;
    const auto f = net.bus_index(br.from_bus);
    const auto t = net.bus_index(br.to_bus);
    if (sol.v[f] == 0.0 || sol.v[t] == 0.0) continue;
    const Complex vf = std::polar(sol.v[f], sol.theta[f]);
    const Complex vt = std::polar(sol.v[t], sol.theta[t]);
    const auto y = detail::branch_admittance(br);
    out.s_from[k] = vf * std::conj(y.yff * vf + y.yft * vt) * net.base_mva;
    out.s_to[k] = vt * std::conj(y.ytf * vf + y.ytt * vt) * net.base_mva;
    out.losses_mw += (out.s_from[k] + out.s_to[k]).real();
  }
  return out;
}

}  // namespace ctsa
