#pragma once

#include <cstdint>

#include "bpi/floorplan.hpp"
#include "bpi/thermal_model.hpp"

namespace bpi {

// Cycles through the units, stressing one at a time at `watts` for
// `segment_steps` steps, with an idle gap of the same length after each.
PowerTrace one_hot_stress_schedule(Index units, Index segment_steps,
                                   double watts, Index cycles);

// Piecewise-constant random workload: each segment activates a random subset
// of units at random levels, scaled so the total stays within the budget.
// Every unit keeps a small idle floor.
PowerTrace random_stress_schedule(const Floorplan& fp, Index steps,
                                  std::uint64_t seed, Index min_segment = 20,
                                  Index max_segment = 120);

}  // namespace bpi
