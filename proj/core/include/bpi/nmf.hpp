#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bpi/dbscan.hpp"
#include "bpi/types.hpp"

namespace bpi {

enum class InitStrategy { identity, bpiss, dbscan, random };

std::string_view to_string(InitStrategy s);
// Throws InvalidInput for unknown names.
InitStrategy parse_strategy(std::string_view name);

struct NmfConfig {
  int max_iters = 500;
  double rel_tol = 1e-6;
  double epsilon_guard = 1e-12;
  std::uint64_t seed = 0;

  void validate() const;
};

struct NmfSeed {
  Matrix r0;  // n x n
  Matrix p0;  // n x m
};

struct DbscanOverrides {
  std::optional<double> eps;
  std::optional<std::size_t> min_pts;
};

struct DbscanSeed {
  Matrix r0;
  Matrix p0;                      // n x (kept observations)
  std::vector<bool> kept_mask;    // per input observation
  DbscanParams params;            // parameters actually used
  ClusterAssignment clusters;
  std::vector<Index> cluster_unit;  // owning unit per cluster, -1 if dropped
  std::vector<std::string> diagnostics;

  Index kept() const;
};

struct NmfResult {
  Matrix r_hat;
  Matrix p_hat;
  std::vector<double> objective_history;  // entry 0 is the initial objective
  int iters_used = 0;
  InitStrategy init_strategy = InitStrategy::random;
  Vector scale;  // per-source weights applied by resolve_scale, empty before
};

// r0 = I, p0 = t_s.
NmfSeed init_identity(const Matrix& t_s, const Vector& p_total);

/// Steady-state seed.
///
/// Column j of r0 is the mean of the observations stressing unit j divided by
/// their mean total power. p0 splits each observation's total power in
/// proportion to the unit temperatures (uniformly when they sum to zero).
NmfSeed init_bpiss(const Matrix& t_s, const Vector& p_total,
                   std::span<const Index> stressed_unit);

/// Clustering seed.
///
/// Observation columns are clustered with MinPts = n + 1 and an eps taken from
/// the k-distance elbow unless overridden. Noise observations are dropped.
/// Each cluster is owned by the unit hottest in its centroid; the centroid
/// divided by the cluster's mean total power becomes that unit's column of
/// r0. Units without a cluster fall back to the steady-state column over the
/// kept observations (or a scaled basis vector if the unit was never
/// stressed). p0 is the kept temperature columns, each rescaled to sum to its
/// total power.
DbscanSeed init_dbscan(const Matrix& t_s, const Vector& p_total,
                       const DbscanOverrides& overrides = {},
                       std::span<const Index> stressed_unit = {});

// Entries i.i.d. uniform on (0, 1].
NmfSeed init_random(Index n, Index m, std::uint64_t seed);

/// Lee-Seung multiplicative updates for min ||t_s - r p||_F over r, p >= 0.
///
/// Runs until max_iters or until the relative objective decrease falls below
/// rel_tol. Zero entries of the seed stay zero.
NmfResult factorize(const Matrix& t_s, Matrix r0, Matrix p0, const NmfConfig& cfg,
                    InitStrategy tag = InitStrategy::random);

/// Removes the per-source scale ambiguity using measured total power.
///
/// Solves min_{x >= 0} sum_k (sum_i x_i p_hat(i,k) - p_total(k))^2 and
/// returns r_hat diag(1/x), diag(x) p_hat. Throws NumericalError naming the
/// source when some x_i is zero.
NmfResult resolve_scale(NmfResult result, const Vector& p_total);

double frobenius_residual(const Matrix& t_s, const Matrix& r, const Matrix& p);

}  // namespace bpi
