#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bpi/floorplan.hpp"
#include "bpi/types.hpp"

namespace bpi {

// State-space thermal model T(k) = a T(k-1) + b P(k) with steady-state
// resistance r = (I - a)^-1 b. Temperatures are Kelvin above ambient.
struct ModelMatrices {
  Matrix a;
  Matrix b;
  Matrix r;

  Index size() const { return a.rows(); }
};

// Per-unit temperatures, one column per time step.
struct ThermalTrace {
  Matrix temps;
  double dt = 1.0;
  std::vector<std::string> unit_ids;

  Index units() const { return temps.rows(); }
  Index steps() const { return temps.cols(); }
};

// Per-unit power in Watts, one column per time step.
struct PowerTrace {
  Matrix powers;
  double dt = 1.0;

  Index units() const { return powers.rows(); }
  Index steps() const { return powers.cols(); }
  Vector totals() const { return powers.colwise().sum().transpose(); }
};

// Steady-state identification experiments: one power column per observation
// plus the unit each experiment stresses (-1 when no single unit dominates).
struct ExperimentPlan {
  Matrix powers;
  std::vector<Index> stressed_unit;

  Index observations() const { return powers.cols(); }

  // `repeats` consecutive observations per unit, each stressing that unit
  // alone at `watts`.
  static ExperimentPlan one_hot(Index units, Index repeats, double watts);
};

struct SteadyStateDataset {
  Matrix t_s;                         // n x m, Kelvin above ambient
  Vector p_total;                     // m, Watts
  std::optional<Matrix> true_p_s;     // n x m, scoring only
  std::vector<bool> outlier_mask;     // m, true for injected outliers
  std::vector<Index> stressed_unit;   // m, from the experiment plan

  Index units() const { return t_s.rows(); }
  Index observations() const { return t_s.cols(); }
};

// Largest eigenvalue magnitude.
double spectral_radius(const Matrix& m);

// Checks shapes, nonnegativity and spectral radius < 1. When
// `check_resistance` is set, also (I - a) r = b to `tol` relative.
void validate_model(const ModelMatrices& model, bool check_resistance,
                    double tol = 1e-9);

/// Builds the synthetic RC-grid ground truth for a floorplan.
///
/// a_ii = 1 - leak - coupling * deg(i), a_ij = coupling for adjacent units,
/// b = diag(self_heat_i * leak) where self_heat_i is `self_heat` scaled by the
/// unit's self_heat_scale, r = (I - a)^-1 b. Throws InvalidInput unless
/// coupling * max_degree + leak < 1.
ModelMatrices build_ground_truth_model(const Floorplan& fp, double self_heat,
                                       double coupling, double leak);

// Uses the floorplan's own thermal parameters.
ModelMatrices build_ground_truth_model(const Floorplan& fp);

ThermalTrace simulate_transient(const ModelMatrices& model, const PowerTrace& p,
                                const Vector& t0);

// r * p_s.
Vector steady_state_temperature(const ModelMatrices& model, const Vector& p_s);

/// Steady-state observations r * p plus truncated Gaussian sensor noise.
///
/// `outlier_count` extra observations are appended: each copies a randomly
/// chosen plan column, adds noise, and scales the temperatures by a factor
/// drawn uniformly from [2, 4]. Those columns are flagged in outlier_mask
/// while p_total and true_p_s keep their uncorrupted values.
SteadyStateDataset generate_steady_dataset(const ModelMatrices& model,
                                           const Floorplan& fp,
                                           const ExperimentPlan& plan,
                                           double noise_sigma,
                                           Index outlier_count,
                                           std::uint64_t seed);

}  // namespace bpi
