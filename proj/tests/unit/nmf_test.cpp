#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "bpi/io.hpp"
#include "bpi/nmf.hpp"
#include "bpi/nnls.hpp"
#include "bpi/scenario.hpp"
#include "oracles.hpp"

using namespace bpi;

namespace {

Floorplan fixture(const char* name) {
  return parse_floorplan(std::string(BPI_DATA_DIR) + "/floorplans/" + name);
}

void expect_monotone(const NmfResult& r) {
  for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
    ASSERT_LE(r.objective_history[i], r.objective_history[i - 1] + 1e-12) << "step " << i;
  }
  ASSERT_GE(r.r_hat.minCoeff(), 0.0);
  ASSERT_GE(r.p_hat.minCoeff(), 0.0);
}

SteadyStateDataset noiseless_one_hot(const Floorplan& fp, Index repeats, double watts,
                                     Index outliers = 0) {
  const ModelMatrices m = build_ground_truth_model(fp);
  const auto plan = ExperimentPlan::one_hot(static_cast<Index>(fp.size()), repeats, watts);
  return generate_steady_dataset(m, fp, plan, 0.0, outliers, 3);
}

}  // namespace

TEST(Strategy, NamesRoundTrip) {
  for (auto s : {InitStrategy::identity, InitStrategy::bpiss, InitStrategy::dbscan,
                 InitStrategy::random}) {
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  }
  EXPECT_THROW(parse_strategy("ica"), InvalidInput);
}

TEST(InitIdentity, SeedsIdentityAndTemperatures) {
  std::mt19937_64 rng(1);
  const Matrix t = oracle::random_nonneg(4, 9, rng);
  const NmfSeed s = init_identity(t, Vector::Ones(9));
  EXPECT_EQ(s.r0, Matrix::Identity(4, 4));
  EXPECT_EQ(s.p0, t);
  EXPECT_EQ(s.r0 * s.p0, t);
  EXPECT_EQ(init_identity(Matrix::Zero(3, 5), Vector::Zero(5)).p0, Matrix::Zero(3, 5));
}

TEST(InitBpiss, NoiselessOneHotRecoversResistance) {
  const Floorplan fp = fixture("fp2.yaml");
  const SteadyStateDataset ds = noiseless_one_hot(fp, 3, 12.0);
  const NmfSeed s = init_bpiss(ds.t_s, ds.p_total, ds.stressed_unit);
  const Matrix r = build_ground_truth_model(fp).r;
  EXPECT_LT((s.r0 - r).norm() / r.norm(), 1e-12);
}

TEST(InitBpiss, TemperatureRatioSplit) {
  Matrix t(2, 3);
  t << 3, 2, 1,
       1, 2, 0;
  Vector total(3);
  total << 8, 5, 4;
  const std::vector<Index> stressed{0, 1, 0};
  const NmfSeed s = init_bpiss(t, total, stressed);
  EXPECT_DOUBLE_EQ(s.p0(0, 0), 6.0);
  EXPECT_DOUBLE_EQ(s.p0(1, 0), 2.0);
  EXPECT_DOUBLE_EQ(s.p0(0, 1), 2.5);  // equal temperatures split evenly
  EXPECT_DOUBLE_EQ(s.p0(1, 1), 2.5);

  Matrix zero = Matrix::Zero(2, 2);
  const NmfSeed z = init_bpiss(zero, Vector::Constant(2, 3.0), std::vector<Index>{0, 1});
  EXPECT_DOUBLE_EQ(z.p0(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(z.p0(1, 1), 1.5);
}

TEST(InitBpiss, MissingStressedUnitIsAnError) {
  const Matrix t = Matrix::Ones(3, 4);
  EXPECT_THROW(init_bpiss(t, Vector::Ones(4), std::vector<Index>{0, 0, 1, 1}), InvalidInput);
}

TEST(InitDbscan, NoiselessRepeatsRecoverResistance) {
  const Floorplan fp = fixture("fp1.yaml");
  const SteadyStateDataset ds = noiseless_one_hot(fp, 5, 15.0);
  const DbscanSeed s = init_dbscan(ds.t_s, ds.p_total, {}, ds.stressed_unit);
  EXPECT_TRUE(std::all_of(s.kept_mask.begin(), s.kept_mask.end(), [](bool b) { return b; }));
  const Matrix r = build_ground_truth_model(fp).r;
  EXPECT_LT((s.r0 - r).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(s.params.min_pts, fp.size() + 1);
  EXPECT_EQ(s.p0.cols(), ds.observations());
  for (Index k = 0; k < s.p0.cols(); ++k) EXPECT_NEAR(s.p0.col(k).sum(), ds.p_total(k), 1e-12);
}

TEST(InitDbscan, DropsExactlyTheInjectedOutliers) {
  const Floorplan fp = fixture("fp1.yaml");
  const SteadyStateDataset ds = noiseless_one_hot(fp, 5, 15.0, 3);
  const DbscanSeed s = init_dbscan(ds.t_s, ds.p_total, {}, ds.stressed_unit);
  ASSERT_EQ(s.kept_mask.size(), ds.outlier_mask.size());
  for (std::size_t i = 0; i < s.kept_mask.size(); ++i) EXPECT_NE(s.kept_mask[i], ds.outlier_mask[i]);
}

TEST(InitDbscan, PreconditionsAndOverrides) {
  EXPECT_THROW(init_dbscan(Matrix::Ones(4, 4), Vector::Ones(4), {}, {}), InvalidInput);

  const Floorplan fp = fixture("fp1.yaml");
  const SteadyStateDataset ds = noiseless_one_hot(fp, 5, 15.0);
  DbscanOverrides o;
  o.eps = 0.25;
  o.min_pts = 3;
  const DbscanSeed s = init_dbscan(ds.t_s, ds.p_total, o, ds.stressed_unit);
  EXPECT_EQ(s.params.eps, 0.25);
  EXPECT_EQ(s.params.min_pts, 3u);

  // Noisy data with a radius far below the noise level leaves nothing.
  ScenarioOptions so;
  const Scenario sc = make_scenario(fp, so);
  o.eps = 1e-6;
  o.min_pts.reset();
  EXPECT_THROW(init_dbscan(sc.steady.t_s, sc.steady.p_total, o, {}), NumericalError);
}

TEST(InitDbscan, TwoClustersOnOneUnitKeepTheLarger) {
  // Unit 0 is stressed at two power levels; the 6-repeat cluster should own it.
  Matrix r(2, 2);
  r << 2.0, 0.3,
       0.3, 2.0;
  Matrix p(2, 15);
  Vector total(15);
  std::vector<Index> stressed;
  for (Index k = 0; k < 15; ++k) {
    const Index unit = k < 10 ? 0 : 1;
    const double w = k < 6 ? 1.0 : (k < 10 ? 4.0 : 1.0);
    p.col(k) = w * Vector::Unit(2, unit);
    total(k) = w;
    stressed.push_back(unit);
  }
  const Matrix t = r * p;
  DbscanOverrides o;
  o.eps = 0.5;
  const DbscanSeed s = init_dbscan(t, total, o, stressed);
  EXPECT_EQ(s.clusters.cluster_count(), 3u);
  EXPECT_FALSE(s.diagnostics.empty());
  EXPECT_EQ(s.cluster_unit[0], 0);
  EXPECT_EQ(s.cluster_unit[1], -1);
  EXPECT_LT((s.r0 - r).norm(), 1e-12);
}

TEST(InitRandom, DeterministicStrictlyPositive) {
  const NmfSeed a = init_random(4, 10, 5);
  const NmfSeed b = init_random(4, 10, 5);
  const NmfSeed c = init_random(4, 10, 6);
  EXPECT_EQ(a.r0, b.r0);
  EXPECT_EQ(a.p0, b.p0);
  EXPECT_NE(a.r0, c.r0);
  EXPECT_GT(a.r0.minCoeff(), 0.0);
  EXPECT_GT(a.p0.minCoeff(), 0.0);
  EXPECT_LE(a.p0.maxCoeff(), 1.0);
}

TEST(Factorize, ExactFixpointConvergesImmediately) {
  std::mt19937_64 rng(2);
  const Matrix r = oracle::random_nonneg(5, 5, rng) + Matrix::Identity(5, 5);
  const Matrix p = oracle::random_nonneg(5, 30, rng);
  const Matrix t = r * p;
  const NmfResult res = factorize(t, r, p, {}, InitStrategy::identity);
  expect_monotone(res);
  EXPECT_LE(res.iters_used, 2);
  EXPECT_LT(res.objective_history.back(), 1e-10);
}

TEST(Factorize, RankOneFromRandomStart) {
  std::mt19937_64 rng(3);
  const Matrix u = oracle::random_nonneg(4, 1, rng) + Matrix::Constant(4, 1, 0.1);
  const Matrix v = oracle::random_nonneg(1, 20, rng) + Matrix::Constant(1, 20, 0.1);
  const Matrix t = u * v;
  const NmfSeed s = init_random(4, 20, 9);
  NmfConfig cfg;
  cfg.max_iters = 20000;
  cfg.rel_tol = 1e-15;
  const NmfResult res = factorize(t, s.r0, s.p0, cfg, InitStrategy::random);
  expect_monotone(res);
  EXPECT_LT(res.objective_history.back(), 1e-8 * t.norm());
}

TEST(Factorize, ZerosStayZeroAndHistoryIsMonotone) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 25; ++trial) {
    const Index n = 2 + trial % 5;
    const Index m = n + 3 + trial;
    const Matrix t = oracle::random_nonneg(n, m, rng, 5.0);
    NmfSeed s = init_random(n, m, static_cast<std::uint64_t>(trial));
    s.r0(0, n - 1) = 0.0;
    s.p0(n - 1, 0) = 0.0;
    NmfConfig cfg;
    cfg.max_iters = 200;
    const NmfResult res = factorize(t, s.r0, s.p0, cfg, InitStrategy::random);
    expect_monotone(res);
    EXPECT_EQ(res.r_hat(0, n - 1), 0.0);
    EXPECT_EQ(res.p_hat(n - 1, 0), 0.0);
    EXPECT_EQ(static_cast<int>(res.objective_history.size()), res.iters_used + 1);
    EXPECT_NEAR(res.objective_history.back(), oracle::frobenius_residual(t, res.r_hat, res.p_hat),
                1e-9 * t.norm());
  }
}

TEST(Factorize, RejectsBadInput) {
  const Matrix t = Matrix::Ones(3, 4);
  EXPECT_THROW(factorize(t, Matrix::Ones(2, 2), Matrix::Ones(2, 4), {}, InitStrategy::random),
               InvalidInput);
  Matrix nan = Matrix::Ones(3, 3);
  nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(factorize(t, nan, Matrix::Ones(3, 4), {}, InitStrategy::random), InvalidInput);
  EXPECT_THROW(factorize(t, -Matrix::Ones(3, 3), Matrix::Ones(3, 4), {}, InitStrategy::random),
               InvalidInput);
  NmfConfig bad;
  bad.max_iters = 0;
  EXPECT_THROW(bad.validate(), InvalidInput);
  bad.max_iters = 10;
  bad.rel_tol = 0.0;
  EXPECT_THROW(bad.validate(), InvalidInput);
}

TEST(Nnls, MatchesUnconstrainedWhenInterior) {
  std::mt19937_64 rng(5);
  const Matrix a = oracle::random_nonneg(10, 4, rng) + Matrix::Identity(10, 4);
  const Vector x_true = Vector::LinSpaced(4, 0.5, 2.0);
  const Vector x = nnls(a, a * x_true);
  EXPECT_LT((x - x_true).norm(), 1e-10);
}

TEST(Nnls, ClampsActiveConstraintsAndMatchesGridOracle) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = oracle::random_nonneg(12, 3, rng);
    const Vector b = oracle::random_nonneg(12, 1, rng).col(0) - Vector::Constant(12, 0.3);
    const Vector x = nnls(a, b);
    EXPECT_GE(x.minCoeff(), 0.0);
    const Vector g = oracle::grid_search_scale(a.transpose(), b, 5.0);
    EXPECT_LT((x - g).cwiseAbs().maxCoeff(), 1e-3) << "trial " << trial;
  }
}

TEST(ResolveScale, AlreadyScaledIsUnchanged) {
  std::mt19937_64 rng(7);
  NmfResult res;
  res.r_hat = oracle::random_nonneg(3, 3, rng) + Matrix::Identity(3, 3);
  res.p_hat = oracle::random_nonneg(3, 12, rng);
  const Vector total = res.p_hat.colwise().sum().transpose();
  const NmfResult out = resolve_scale(res, total);
  EXPECT_LT((out.scale - Vector::Ones(3)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((out.r_hat - res.r_hat).norm(), 1e-10);
}

TEST(ResolveScale, UniformDoubling) {
  Matrix p_true = Matrix::Zero(3, 9);
  for (Index k = 0; k < 9; ++k) p_true(k % 3, k) = 1.0 + static_cast<double>(k);
  NmfResult res;
  res.r_hat = Matrix::Identity(3, 3);
  res.p_hat = 2.0 * p_true;
  const NmfResult out = resolve_scale(res, p_true.colwise().sum().transpose());
  EXPECT_LT((out.scale - Vector::Constant(3, 0.5)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((out.p_hat - p_true).norm(), 1e-12);
}

TEST(ResolveScale, PropertyMatchesGridOracleAndKeepsReconstruction) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    NmfResult res;
    res.r_hat = oracle::random_nonneg(3, 3, rng) + Matrix::Identity(3, 3);
    res.p_hat = oracle::random_nonneg(3, 15, rng) + Matrix::Constant(3, 15, 0.05);
    Vector w(3);
    w << u(rng), u(rng), u(rng);
    Vector total = (w.asDiagonal() * res.p_hat).colwise().sum().transpose();
    for (Index k = 0; k < total.size(); ++k) total(k) *= 1.0 + 0.05 * (u(rng) - 1.6);
    const NmfResult out = resolve_scale(res, total);
    const Vector g = oracle::grid_search_scale(res.p_hat, total, 6.0);
    EXPECT_LT((out.scale - g).cwiseAbs().maxCoeff(), 1e-3) << "trial " << trial;
    const Matrix before = res.r_hat * res.p_hat;
    EXPECT_LT((out.r_hat * out.p_hat - before).norm() / before.norm(), 1e-9);
  }
}

TEST(ResolveScale, UnidentifiableSourceIsNamed) {
  NmfResult res;
  res.r_hat = Matrix::Identity(2, 2);
  res.p_hat = Matrix::Ones(2, 4);
  res.p_hat.row(1).setZero();
  try {
    resolve_scale(res, Vector::Ones(4));
    FAIL() << "expected an error";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("source 1"), std::string::npos) << e.what();
  }
}

TEST(InitializationSensitivity, RandomSpreadsDbscanIsDeterministic) {
  for (const char* name : {"fp1.yaml", "fp2.yaml", "fp3.yaml", "fp4.yaml"}) {
    const Floorplan fp = fixture(name);
    const Scenario sc = make_scenario(fp, {});
    const ModelMatrices truth = sc.truth;
    const Index n = static_cast<Index>(fp.size());
    const Index m = sc.steady.observations();

    std::vector<double> objectives, r_errors;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const NmfSeed s = init_random(n, m, seed);
      NmfConfig cfg;
      cfg.max_iters = 200;
      NmfResult res = factorize(sc.steady.t_s, s.r0, s.p0, cfg, InitStrategy::random);
      expect_monotone(res);
      objectives.push_back(res.objective_history.back());
      try {
        res = resolve_scale(std::move(res), sc.steady.p_total);
        r_errors.push_back(relative_error_pct(res.r_hat, truth.r));
      } catch (const NumericalError&) {
        // A source collapsed to zero; count the run as a total miss.
        r_errors.push_back(std::numeric_limits<double>::infinity());
      }
    }
    const auto [lo, hi] = std::minmax_element(objectives.begin(), objectives.end());
    EXPECT_GT(*hi - *lo, 0.0) << name;

    IdentifyOptions opts;
    opts.nmf.max_iters = 3;
    const IdentifiedModel a = offline_identify(sc.steady, sc.training, opts);
    const IdentifiedModel b = offline_identify(sc.steady, sc.training, opts);
    EXPECT_EQ(a.matrices.r, b.matrices.r) << name;
    EXPECT_EQ(a.matrices.a, b.matrices.a) << name;

    std::nth_element(r_errors.begin(), r_errors.begin() + 5, r_errors.end());
    EXPECT_LE(relative_error_pct(a.matrices.r, truth.r), r_errors[5]) << name;
  }
}
