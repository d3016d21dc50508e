#pragma once

#include <span>
#include <string>
#include <vector>

#include "bpi/nmf.hpp"
#include "bpi/thermal_model.hpp"

namespace bpi {

struct TransientPair {
  PowerTrace power;
  ThermalTrace temps;
};

struct OfflineDiagnostics {
  std::vector<double> objective_history;
  int nmf_iters = 0;
  Index observations = 0;
  Index kept_observations = 0;
  std::vector<bool> kept_mask;
  double a_fit_residual = 0.0;     // relative, before projection
  Index a_clipped = 0;             // negative entries of a set to zero
  double a_shrink = 1.0;           // factor applied to reach rho(a) <= 0.999
  Index b_clipped = 0;
  double model_residual = 0.0;     // ||(I - a)^-1 b - r|| / ||r||, nonzero after clipping
  double steady_residual = 0.0;    // ||T_s,kept - r p_hat|| / ||T_s,kept||
  Vector source_scale;
  Matrix p_hat;
  std::vector<std::string> notes;
};

struct IdentifiedModel {
  ModelMatrices matrices;
  InitStrategy init_strategy = InitStrategy::dbscan;
  std::vector<std::string> unit_ids;
  OfflineDiagnostics diagnostics;
};

struct IdentifyOptions {
  InitStrategy strategy = InitStrategy::dbscan;
  NmfConfig nmf;
  DbscanOverrides dbscan;
  // Replace the seed's p by the exact nonnegative least-squares fit to its r
  // before alternating. Skipped when that would leave a source with no power.
  bool settle_p = true;
};

/// Offline phase: NMF on the steady-state data gives r and the steady power;
/// a is then fitted on the transient pairs from
///   T(k) - r P(k) = a (T(k-1) - r P(k)),
/// which is the recurrence with b = (I - a) r substituted. The fit is
/// projected onto a >= 0 with spectral radius <= 0.999 and b = (I - a) r is
/// clipped at zero. r stays the factorization's estimate; any mismatch with
/// (I - a)^-1 b left by the clipping is reported as model_residual.
IdentifiedModel offline_identify(const SteadyStateDataset& ds,
                                 std::span<const TransientPair> transients,
                                 const IdentifyOptions& options);

struct OnlineEstimate {
  PowerTrace p_est;
  double clamped_fraction = 0.0;
  bool rescaled = false;
  // 1 when step 0 could not be bootstrapped from r and was dropped.
  Index first_step = 0;
};

inline constexpr double kMaxConditionNumber = 1e12;

/// Online phase: p(k) = b^-1 (T(k) - a T(k-1)) for k >= 1 and p(0) = r^-1 T(0)
/// under a steady-state assumption. Negative estimates are clamped to zero;
/// with `rescale` each column is scaled to the measured total.
OnlineEstimate online_estimate(const ModelMatrices& model, const ThermalTrace& t_r,
                               const Vector& p_total, bool rescale = true);

inline OnlineEstimate online_estimate(const IdentifiedModel& model,
                                      const ThermalTrace& t_r,
                                      const Vector& p_total, bool rescale = true) {
  return online_estimate(model.matrices, t_r, p_total, rescale);
}

// 100 * sum |est - truth| / sum truth, over all units and steps.
double estimation_error(const PowerTrace& est, const PowerTrace& truth);

// Same, skipping truth columns the estimate dropped.
double estimation_error(const OnlineEstimate& est, const PowerTrace& truth);

}  // namespace bpi
