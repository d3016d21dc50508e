#include "bpi/workload.hpp"

#include <algorithm>
#include <random>

namespace bpi {

PowerTrace one_hot_stress_schedule(Index units, Index segment_steps, double watts,
                                   Index cycles) {
  require(units >= 1 && segment_steps >= 1 && cycles >= 1,
          "one_hot_stress_schedule: units, segment_steps and cycles must be >= 1");
  require(watts > 0.0, "one_hot_stress_schedule: watts must be > 0");
  PowerTrace p;
  p.powers = Matrix::Zero(units, 2 * units * segment_steps * cycles);
  Index k = 0;
  for (Index c = 0; c < cycles; ++c) {
    for (Index u = 0; u < units; ++u) {
      p.powers.block(u, k, 1, segment_steps).setConstant(watts);
      k += 2 * segment_steps;
    }
  }
  return p;
}

PowerTrace random_stress_schedule(const Floorplan& fp, Index steps, std::uint64_t seed,
                                  Index min_segment, Index max_segment) {
  require(steps >= 1, "random_stress_schedule: steps must be >= 1");
  require(min_segment >= 1 && max_segment >= min_segment,
          "random_stress_schedule: bad segment bounds");
  const Index n = static_cast<Index>(fp.size());
  const double budget = fp.power_budget_w();
  const double idle = 0.01 * budget / static_cast<double>(n);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> seg_len(min_segment, max_segment);
  std::uniform_real_distribution<double> unit01(0.0, 1.0);

  PowerTrace p;
  p.powers.resize(n, steps);
  Index k = 0;
  while (k < steps) {
    const Index len = std::min(seg_len(rng), steps - k);
    Vector level = Vector::Constant(n, idle);
    for (Index i = 0; i < n; ++i) {
      const bool active = unit01(rng) < 0.5;
      const double draw = unit01(rng);
      if (active) level(i) += draw * budget / 4.0;
    }
    const double total = level.sum();
    const double cap = 0.9 * budget;
    if (total > cap) level *= cap / total;
    p.powers.middleCols(k, len).colwise() = level;
    k += len;
  }
  return p;
}

}  // namespace bpi
