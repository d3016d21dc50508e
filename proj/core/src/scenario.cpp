#include "bpi/scenario.hpp"

#include <algorithm>
#include <chrono>

#include "bpi/workload.hpp"

namespace bpi {

namespace {

// splitmix64 finalizer; decorrelates per-purpose streams drawn from one seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Index ScenarioOptions::repeats_for(Index units) const {
  return repeats_per_unit > 0 ? repeats_per_unit : std::max<Index>(5, units + 2);
}

Scenario make_scenario(const Floorplan& fp, const ScenarioOptions& options) {
  require(options.stress_fraction > 0.0 && options.stress_fraction <= 1.0,
          "scenario: stress_fraction must be in (0, 1]");
  require(options.transient_steps >= 2, "scenario: transient_steps must be >= 2");

  Scenario sc{fp, build_ground_truth_model(fp), {}, {}, {}};
  const Index n = static_cast<Index>(fp.size());
  const double watts = options.stress_fraction * fp.power_budget_w();
  const auto ids = fp.unit_ids();

  const ExperimentPlan plan = ExperimentPlan::one_hot(n, options.repeats_for(n), watts);
  sc.steady = generate_steady_dataset(sc.truth, fp, plan, options.noise_sigma,
                                      options.outlier_count, derive_seed(options.seed, 1));

  TransientPair train;
  train.power = one_hot_stress_schedule(n, options.training_segment, watts,
                                        options.training_cycles);
  train.temps = simulate_transient(sc.truth, train.power, Vector::Zero(n));
  train.temps.unit_ids = ids;
  sc.training.push_back(std::move(train));

  sc.workload.power = random_stress_schedule(fp, options.transient_steps,
                                             derive_seed(options.seed, 2));
  const Vector t0 = steady_state_temperature(sc.truth, sc.workload.power.powers.col(0));
  sc.workload.temps = simulate_transient(sc.truth, sc.workload.power, t0);
  sc.workload.temps.unit_ids = ids;
  return sc;
}

double relative_error_pct(const Matrix& estimate, const Matrix& truth) {
  require(estimate.rows() == truth.rows() && estimate.cols() == truth.cols(),
          "relative_error_pct: shape mismatch");
  const double norm = truth.norm();
  require(norm > 0.0, "relative_error_pct: truth is zero");
  return 100.0 * (estimate - truth).norm() / norm;
}

StrategyOutcome run_strategy(const Scenario& scenario, const IdentifyOptions& options,
                             bool rescale, int timing_repeats) {
  using clock = std::chrono::steady_clock;
  const Vector totals = scenario.workload.power.totals();
  std::vector<double> times;
  StrategyOutcome out;
  for (int rep = 0; rep < std::max(1, timing_repeats); ++rep) {
    const auto start = clock::now();
    IdentifiedModel model = offline_identify(scenario.steady, scenario.training, options);
    OnlineEstimate est = online_estimate(model, scenario.workload.temps, totals, rescale);
    times.push_back(std::chrono::duration<double>(clock::now() - start).count());
    if (rep == 0) {
      out.model = std::move(model);
      out.estimate = std::move(est);
    }
  }
  std::sort(times.begin(), times.end());
  out.runtime_s = times[times.size() / 2];
  out.error_pct = estimation_error(out.estimate, scenario.workload.power);
  out.r_error_pct = relative_error_pct(out.model.matrices.r, scenario.truth.r);
  return out;
}

}  // namespace bpi
