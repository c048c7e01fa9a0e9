#include "ctsa/grid/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctsa {

void scale_demand(Network& net, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw std::invalid_argument("load scale must be positive");
  for (std::size_t i = 0; i < net.bus_count(); ++i) {
    net.mutable_bus(i).p_load *= factor;
    net.mutable_bus(i).q_load *= factor;
  }
  for (std::size_t g = 0; g < net.generator_count(); ++g) {
    auto& gen = net.mutable_generator(g);
    gen.p = std::min(gen.p * factor, gen.p_max);
  }
}

}  // namespace ctsa
