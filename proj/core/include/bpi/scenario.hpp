#pragma once

#include <cstdint>
#include <vector>

#include "bpi/floorplan.hpp"
#include "bpi/identify.hpp"
#include "bpi/thermal_model.hpp"

namespace bpi {

// Knobs for one ground-truth experiment on a floorplan.
struct ScenarioOptions {
  double noise_sigma = 0.1;
  Index outlier_count = 3;
  Index repeats_per_unit = 0;     // 0: max(5, n + 2)
  Index transient_steps = 2000;   // held-out workload length
  Index training_segment = 40;    // steps per one-hot stress segment
  Index training_cycles = 2;
  double stress_fraction = 0.25;  // one-hot stress power / power budget
  std::uint64_t seed = 1;

  Index repeats_for(Index units) const;
};

/// Everything the verification flow needs for one floorplan: the true model,
/// steady-state identification data, one-hot training transients and a
/// held-out random workload warm-started at its first steady state.
struct Scenario {
  Floorplan floorplan;
  ModelMatrices truth;
  SteadyStateDataset steady;
  std::vector<TransientPair> training;
  TransientPair workload;
};

Scenario make_scenario(const Floorplan& fp, const ScenarioOptions& options);

struct StrategyOutcome {
  IdentifiedModel model;
  OnlineEstimate estimate;
  double error_pct = 0.0;
  double r_error_pct = 0.0;   // relative Frobenius error of r, percent
  double runtime_s = 0.0;     // offline + online wall clock
};

// Runs offline identification and online estimation on the held-out workload
// and scores the result. `timing_repeats` > 1 reports the median wall clock.
StrategyOutcome run_strategy(const Scenario& scenario, const IdentifyOptions& options,
                             bool rescale = true, int timing_repeats = 1);

// Relative Frobenius error in percent.
double relative_error_pct(const Matrix& estimate, const Matrix& truth);

}  // namespace bpi
