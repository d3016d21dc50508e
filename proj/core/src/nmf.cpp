#include "bpi/nmf.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bpi/nnls.hpp"

namespace bpi {

std::string_view to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::identity: return "identity";
    case InitStrategy::bpiss: return "bpiss";
    case InitStrategy::dbscan: return "dbscan";
    case InitStrategy::random: return "random";
  }
  return "unknown";
}

InitStrategy parse_strategy(std::string_view name) {
  for (auto s : {InitStrategy::identity, InitStrategy::bpiss, InitStrategy::dbscan,
                 InitStrategy::random}) {
    if (name == to_string(s)) return s;
  }
  throw InvalidInput("unknown init strategy '" + std::string(name) +
                     "' (expected identity, bpiss, dbscan or random)");
}

void NmfConfig::validate() const {
  require(max_iters >= 1, "nmf: max_iters must be >= 1");
  require(rel_tol > 0.0, "nmf: rel_tol must be > 0");
  require(epsilon_guard > 0.0, "nmf: epsilon_guard must be > 0");
}

Index DbscanSeed::kept() const {
  return static_cast<Index>(std::count(kept_mask.begin(), kept_mask.end(), true));
}

double frobenius_residual(const Matrix& t_s, const Matrix& r, const Matrix& p) {
  return (t_s - r * p).norm();
}

namespace {

void check_nonneg(const Matrix& m, const char* what) {
  require(m.allFinite(), std::string(what) + ": non-finite entry");
  require((m.array() >= 0.0).all(), std::string(what) + ": negative entry");
}

Vector split_by_temperature(const Eigen::Ref<const Vector>& temps, double total) {
  const double sum = temps.sum();
  if (sum > 0.0) return temps * (total / sum);
  return Vector::Constant(temps.size(), total / static_cast<double>(temps.size()));
}

// Mean of the columns stressing `unit` divided by their mean total power.
// Returns false when no column stresses the unit or the power is zero.
bool stressed_column(const Matrix& t_s, const Vector& p_total,
                     std::span<const Index> stressed_unit, const std::vector<bool>* keep,
                     Index unit, Vector& out) {
  Vector sum = Vector::Zero(t_s.rows());
  double power = 0.0;
  Index count = 0;
  for (Index k = 0; k < t_s.cols(); ++k) {
    if (stressed_unit[static_cast<std::size_t>(k)] != unit) continue;
    if (keep && !(*keep)[static_cast<std::size_t>(k)]) continue;
    sum += t_s.col(k);
    power += p_total(k);
    ++count;
  }
  if (count == 0 || power <= 0.0) return false;
  out = sum / power;  // (sum / count) / (power / count)
  return true;
}

}  // namespace

NmfSeed init_identity(const Matrix& t_s, const Vector& p_total) {
  check_nonneg(t_s, "init_identity");
  require(p_total.size() == t_s.cols(), "init_identity: p_total length != observations");
  return {Matrix::Identity(t_s.rows(), t_s.rows()), t_s};
}

NmfSeed init_bpiss(const Matrix& t_s, const Vector& p_total,
                   std::span<const Index> stressed_unit) {
  check_nonneg(t_s, "init_bpiss");
  const Index n = t_s.rows();
  const Index m = t_s.cols();
  require(p_total.size() == m, "init_bpiss: p_total length != observations");
  require(static_cast<Index>(stressed_unit.size()) == m,
          "init_bpiss: stressed_unit length != observations");

  NmfSeed seed;
  seed.r0.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    Vector col;
    if (!stressed_column(t_s, p_total, stressed_unit, nullptr, j, col)) {
      throw InvalidInput("init_bpiss: no stressed observation for unit " + std::to_string(j));
    }
    seed.r0.col(j) = col;
  }
  seed.p0.resize(n, m);
  for (Index k = 0; k < m; ++k) seed.p0.col(k) = split_by_temperature(t_s.col(k), p_total(k));
  return seed;
}

DbscanSeed init_dbscan(const Matrix& t_s, const Vector& p_total,
                       const DbscanOverrides& overrides,
                       std::span<const Index> stressed_unit) {
  check_nonneg(t_s, "init_dbscan");
  const Index n = t_s.rows();
  const Index m = t_s.cols();
  require(p_total.size() == m, "init_dbscan: p_total length != observations");
  if (m <= n) {
    throw InvalidInput("init_dbscan: need more observations than units (m=" +
                       std::to_string(m) + ", n=" + std::to_string(n) + ")");
  }
  require(stressed_unit.empty() || static_cast<Index>(stressed_unit.size()) == m,
          "init_dbscan: stressed_unit length != observations");

  require(t_s.allFinite(), "init_dbscan: non-finite temperatures");
  const Matrix dist = pairwise_distances(t_s);
  DbscanSeed seed;
  seed.params = DbscanParams::for_dimension(1.0, static_cast<std::size_t>(n));
  if (overrides.min_pts) {
    require(*overrides.min_pts >= 2, "init_dbscan: min_pts must be >= 2");
    seed.params.min_pts = *overrides.min_pts;
    seed.params.k = seed.params.min_pts - 1;
  }
  if (overrides.eps) {
    seed.params.eps = *overrides.eps;
  } else {
    if (static_cast<Index>(seed.params.k) >= m) {
      throw InvalidInput("init_dbscan: k-distance needs more than " +
                         std::to_string(seed.params.k) + " observations");
    }
    const KDistanceResult kd = k_distance_epsilon_from(dist, seed.params.k);
    // Exact repeats give a flat zero k-distance graph; any tiny radius then
    // groups them.
    const double floor = 1e-9 * (1.0 + t_s.colwise().norm().maxCoeff());
    seed.params.eps = kd.eps;
    if (seed.params.eps < floor) {
      seed.params.eps = floor;
      seed.diagnostics.push_back("k-distance graph is flat at zero; eps floored to " +
                                 std::to_string(floor));
    }
  }
  seed.params.validate();

  seed.clusters = dbscan(t_s, dist, seed.params);
  const auto& cl = seed.clusters;
  if (cl.cluster_count() == 0) {
    throw NumericalError("init_dbscan: every observation was classified as noise with eps=" +
                         std::to_string(seed.params.eps) +
                         (overrides.eps ? "; increase --eps" : "; set eps explicitly (--eps)"));
  }

  seed.kept_mask.resize(static_cast<std::size_t>(m));
  for (Index k = 0; k < m; ++k) {
    seed.kept_mask[static_cast<std::size_t>(k)] = cl.labels[static_cast<std::size_t>(k)] != kNoise;
  }

  const auto sizes = cl.cluster_sizes();
  const auto c_count = static_cast<Index>(cl.cluster_count());
  seed.cluster_unit.assign(static_cast<std::size_t>(c_count), -1);
  std::vector<Index> owner(static_cast<std::size_t>(n), -1);
  for (Index c = 0; c < c_count; ++c) {
    Index unit = 0;
    cl.centroids.col(c).maxCoeff(&unit);
    const Index prev = owner[static_cast<std::size_t>(unit)];
    if (prev < 0) {
      owner[static_cast<std::size_t>(unit)] = c;
      seed.cluster_unit[static_cast<std::size_t>(c)] = unit;
      continue;
    }
    // Denser (larger) cluster wins; ties keep the earlier one.
    const bool replace = sizes[static_cast<std::size_t>(c)] > sizes[static_cast<std::size_t>(prev)];
    const Index loser = replace ? prev : c;
    if (replace) {
      owner[static_cast<std::size_t>(unit)] = c;
      seed.cluster_unit[static_cast<std::size_t>(c)] = unit;
      seed.cluster_unit[static_cast<std::size_t>(prev)] = -1;
    }
    seed.diagnostics.push_back("clusters " + std::to_string(prev) + " and " +
                               std::to_string(c) + " both peak at unit " +
                               std::to_string(unit) + "; cluster " + std::to_string(loser) +
                               " not used for r0");
  }

  seed.r0 = Matrix::Zero(n, n);
  std::vector<bool> filled(static_cast<std::size_t>(n), false);
  for (Index j = 0; j < n; ++j) {
    const Index c = owner[static_cast<std::size_t>(j)];
    if (c < 0) continue;
    double power = 0.0;
    for (Index k = 0; k < m; ++k) {
      if (cl.labels[static_cast<std::size_t>(k)] == c) power += p_total(k);
    }
    power /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
    if (power <= 0.0) continue;
    seed.r0.col(j) = cl.centroids.col(c) / power;
    filled[static_cast<std::size_t>(j)] = true;
  }

  double diag_mean = 0.0;
  Index diag_count = 0;
  for (Index j = 0; j < n; ++j) {
    if (filled[static_cast<std::size_t>(j)]) {
      diag_mean += seed.r0(j, j);
      ++diag_count;
    }
  }
  diag_mean = diag_count > 0 ? diag_mean / static_cast<double>(diag_count) : 1.0;

  for (Index j = 0; j < n; ++j) {
    if (filled[static_cast<std::size_t>(j)]) continue;
    Vector col;
    if (!stressed_unit.empty() &&
        stressed_column(t_s, p_total, stressed_unit, &seed.kept_mask, j, col)) {
      seed.r0.col(j) = col;
      seed.diagnostics.push_back("unit " + std::to_string(j) +
                                 " has no cluster; using its steady-state column");
    } else {
      seed.r0.col(j) = Vector::Unit(n, j) * diag_mean;
      seed.diagnostics.push_back("unit " + std::to_string(j) +
                                 " has no cluster or stressed observation; using a basis column");
    }
  }

  seed.p0.resize(n, seed.kept());
  Index w = 0;
  for (Index k = 0; k < m; ++k) {
    if (!seed.kept_mask[static_cast<std::size_t>(k)]) continue;
    seed.p0.col(w++) = split_by_temperature(t_s.col(k), p_total(k));
  }
  return seed;
}

NmfSeed init_random(Index n, Index m, std::uint64_t seed) {
  require(n >= 1 && m >= 1, "init_random: dimensions must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&] { return 1.0 - u(rng); };  // (0, 1]
  NmfSeed s;
  s.r0.resize(n, n);
  s.p0.resize(n, m);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) s.r0(i, j) = draw();
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) s.p0(i, j) = draw();
  return s;
}

NmfResult factorize(const Matrix& t_s, Matrix r0, Matrix p0, const NmfConfig& cfg,
                    InitStrategy tag) {
  cfg.validate();
  const Index n = t_s.rows();
  const Index m = t_s.cols();
  require(r0.rows() == n && r0.cols() == n, "factorize: r0 must be n x n");
  require(p0.rows() == n && p0.cols() == m, "factorize: p0 must be n x m");
  if (!t_s.allFinite() || !r0.allFinite() || !p0.allFinite()) {
    throw InvalidInput("factorize: non-finite input");
  }
  check_nonneg(t_s, "factorize t_s");
  check_nonneg(r0, "factorize r0");
  check_nonneg(p0, "factorize p0");

  NmfResult res;
  res.init_strategy = tag;
  res.r_hat = std::move(r0);
  res.p_hat = std::move(p0);
  res.objective_history.push_back(frobenius_residual(t_s, res.r_hat, res.p_hat));

  const double guard = cfg.epsilon_guard;

  for (int it = 0; it < cfg.max_iters; ++it) {
    const double prev = res.objective_history.back();
    if (prev == 0.0) break;

    Matrix& r = res.r_hat;
    Matrix& p = res.p_hat;
    const Matrix rtr = r.transpose() * r;
    p.array() *= (r.transpose() * t_s).array() / ((rtr * p).array() + guard);
    const Matrix ppt = p * p.transpose();
    r.array() *= (t_s * p.transpose()).array() / ((r * ppt).array() + guard);

    const double cur = frobenius_residual(t_s, r, p);
    if (!std::isfinite(cur)) throw NumericalError("factorize: objective became non-finite");
    res.objective_history.push_back(cur);
    ++res.iters_used;
    if (prev - cur < cfg.rel_tol * prev) break;
  }
  return res;
}

NmfResult resolve_scale(NmfResult result, const Vector& p_total) {
  const Index n = result.p_hat.rows();
  require(p_total.size() == result.p_hat.cols(), "resolve_scale: p_total length != observations");
  for (Index i = 0; i < n; ++i) {
    if (result.p_hat.row(i).maxCoeff() <= 0.0) {
      throw NumericalError("resolve_scale: source " + std::to_string(i) +
                           " has no power in any observation");
    }
  }
  const Vector x = nnls(result.p_hat.transpose(), p_total);
  for (Index i = 0; i < n; ++i) {
    if (!(x(i) > 0.0)) {
      throw NumericalError("resolve_scale: source " + std::to_string(i) +
                           " gets zero weight against total power (unidentifiable)");
    }
  }
  result.r_hat = result.r_hat * x.cwiseInverse().asDiagonal();
  result.p_hat = x.asDiagonal() * result.p_hat;
  result.scale = x;
  return result;
}

}  // namespace bpi
