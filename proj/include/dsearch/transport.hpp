#pragma once

// Exact solver for the balanced transportation problem: minimize
// sum T_ij c_ij subject to row sums = supply, column sums = demand, T >= 0.

#include <span>
#include <vector>

namespace dsearch {

// Transportation simplex with Bland-style pivoting. supply and demand must be
// positive and sum to the same total (the demand side is rescaled to absorb
// rounding dust). cost is row-major supply.size() x demand.size().
double transport_min_cost(std::span<const double> supply, std::span<const double> demand,
                          std::span<const double> cost);

}  // namespace dsearch
