#pragma once

#include "ctsa/grid/network.hpp"

namespace ctsa {

// Scales every load (P and Q) by `factor` and every generator dispatch by the
// same factor, capped at p_max. Used to derive loading scenarios from a case.
void scale_demand(Network& net, double factor);

}  // namespace ctsa
