#include <gtest/gtest.h>

#include <random>

#include "bpi/thermal_model.hpp"
#include "bpi/workload.hpp"
#include "oracles.hpp"

using namespace bpi;

namespace {

Floorplan grid2x2() { return Floorplan::grid("FP1", 2, 2, 60.0); }

double rel(const Matrix& x, const Matrix& y) { return (x - y).norm() / y.norm(); }

PowerTrace random_trace(Index n, Index k, std::mt19937_64& rng, double hi = 5.0) {
  PowerTrace p;
  p.powers = oracle::random_nonneg(n, k, rng, hi);
  return p;
}

}  // namespace

TEST(GroundTruthModel, ZeroCouplingDecouplesUnits) {
  const auto fp = grid2x2();
  const ModelMatrices m = build_ground_truth_model(fp, 0.7, 0.0, 0.3);
  EXPECT_TRUE(m.a.isDiagonal());
  EXPECT_LT((m.r - 0.7 * Matrix::Identity(4, 4)).norm(), 1e-12);
}

TEST(GroundTruthModel, MatchesDirectInversionOn2x2Grid) {
  const auto fp = grid2x2();
  const ModelMatrices m = build_ground_truth_model(fp, 0.5, 0.01, 0.05);
  const Matrix expected = oracle::invert(Matrix::Identity(4, 4) - m.a) * m.b;
  EXPECT_LT(rel(m.r, expected), 1e-12);
  EXPECT_LT((m.r - m.r.transpose()).norm(), 1e-12);
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 4; ++j) {
      if (i == j) continue;
      EXPECT_GT(m.r(i, i), m.r(i, j));
      EXPECT_GT(m.r(i, j), 0.0);
    }
  }
}

TEST(GroundTruthModel, EntriesFollowAdjacency) {
  const auto fp = Floorplan::grid("g", 2, 3, 10.0);
  const ModelMatrices m = build_ground_truth_model(fp, 0.6, 0.02, 0.1);
  for (std::size_t i = 0; i < fp.size(); ++i) {
    const auto ii = static_cast<Index>(i);
    EXPECT_DOUBLE_EQ(m.a(ii, ii), 1.0 - 0.1 - 0.02 * static_cast<double>(fp.degree(i)));
    EXPECT_DOUBLE_EQ(m.b(ii, ii), 0.6 * 0.1);
    for (std::size_t j = 0; j < fp.size(); ++j) {
      if (i == j) continue;
      EXPECT_DOUBLE_EQ(m.a(ii, static_cast<Index>(j)), fp.adjacent(i, j) ? 0.02 : 0.0);
      EXPECT_EQ(m.b(ii, static_cast<Index>(j)), 0.0);
    }
  }
}

TEST(GroundTruthModel, RejectsUnstableParameters) {
  // Unit 5 of a 3x3 grid has degree 4; a degree-3 unit exists on 3x3 edges.
  const auto fp = Floorplan::grid("g", 3, 3, 10.0);
  EXPECT_THROW(build_ground_truth_model(fp, 0.5, 0.2, 0.5), InvalidInput);
  const auto line = Floorplan::explicit_layout(
      "star", {{"c", "c"}, {"x", "x"}, {"y", "y"}, {"z", "z"}}, {{0, 1}, {0, 2}, {0, 3}}, 10.0);
  EXPECT_THROW(build_ground_truth_model(line, 0.5, 0.2, 0.5), InvalidInput);
  EXPECT_NO_THROW(build_ground_truth_model(line, 0.5, 0.1, 0.5));
}

TEST(GroundTruthModel, HeterogeneousSelfHeatScales) {
  const auto fp = Floorplan::explicit_layout(
      "het", {{"big", "big", 1.5}, {"lit", "lit", 1.0}, {"gpu", "gpu", 2.0}}, {{0, 1}, {1, 2}},
      10.0);
  const ModelMatrices m = build_ground_truth_model(fp, 2.0, 0.02, 0.1);
  EXPECT_DOUBLE_EQ(m.b(0, 0), 2.0 * 1.5 * 0.1);
  EXPECT_DOUBLE_EQ(m.b(1, 1), 2.0 * 1.0 * 0.1);
  EXPECT_DOUBLE_EQ(m.b(2, 2), 2.0 * 2.0 * 0.1);
}

TEST(GroundTruthModel, PropertyResistanceReconstruction) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto rows = static_cast<std::size_t>(dim(rng));
    const auto cols = static_cast<std::size_t>(dim(rng)) + 1;
    const auto fp = Floorplan::grid("g", rows, cols, 10.0);
    const double leak = u(rng) * 0.5;
    const double coupling = u(rng) * (1.0 - leak) / (static_cast<double>(fp.max_degree()) + 1.0);
    const ModelMatrices m = build_ground_truth_model(fp, u(rng) * 3.0, coupling, leak);
    const Index n = m.size();
    EXPECT_LT(((Matrix::Identity(n, n) - m.a) * m.r - m.b).norm(), 1e-9 * m.b.norm());
    EXPECT_LT(spectral_radius(m.a), 1.0);
    EXPECT_GE(m.r.minCoeff(), 0.0);
    for (Index i = 0; i < n; ++i) EXPECT_GE(m.r(i, i), m.r.row(i).maxCoeff() - 1e-15);
  }
}

TEST(SimulateTransient, ZeroInputStaysZero) {
  const ModelMatrices m = build_ground_truth_model(grid2x2());
  PowerTrace p;
  p.powers = Matrix::Zero(4, 50);
  const ThermalTrace t = simulate_transient(m, p, Vector::Zero(4));
  EXPECT_EQ(t.temps.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(t.steps(), 50);
}

TEST(SimulateTransient, NaturalResponseDecays) {
  const ModelMatrices m = build_ground_truth_model(grid2x2());
  PowerTrace p;
  p.powers = Matrix::Zero(4, 200);
  const ThermalTrace t = simulate_transient(m, p, Vector::Constant(4, 10.0));
  for (Index k = 1; k < t.steps(); ++k) {
    EXPECT_LE(t.temps.col(k).maxCoeff(), t.temps.col(k - 1).maxCoeff() + 1e-15);
  }
  EXPECT_LT(t.temps.col(199).maxCoeff(), 1e-3);
}

TEST(SimulateTransient, ConstantPowerReachesSteadyState) {
  const ModelMatrices m = build_ground_truth_model(grid2x2());
  PowerTrace p;
  p.powers = Vector::LinSpaced(4, 1.0, 4.0).replicate(1, 600);
  const ThermalTrace t = simulate_transient(m, p, Vector::Zero(4));
  const Vector expected = m.r * p.powers.col(0);
  EXPECT_LT((t.temps.col(599) - expected).norm() / expected.norm(), 1e-6);
}

TEST(SimulateTransient, RejectsMismatchedInputs) {
  const ModelMatrices m = build_ground_truth_model(grid2x2());
  PowerTrace p;
  p.powers = Matrix::Zero(3, 5);
  EXPECT_THROW(simulate_transient(m, p, Vector::Zero(4)), InvalidInput);
  p.powers = Matrix::Zero(4, 5);
  EXPECT_THROW(simulate_transient(m, p, Vector::Zero(3)), InvalidInput);
  EXPECT_THROW(simulate_transient(m, p, -Vector::Ones(4)), InvalidInput);
}

TEST(SimulateTransient, PropertyLinearity) {
  const ModelMatrices m = build_ground_truth_model(Floorplan::grid("g", 2, 4, 60.0));
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const PowerTrace p1 = random_trace(8, 60, rng);
    const PowerTrace p2 = random_trace(8, 60, rng);
    PowerTrace sum;
    sum.powers = p1.powers + p2.powers;
    const Vector z = Vector::Zero(8);
    const Matrix lhs = simulate_transient(m, sum, z).temps;
    const Matrix rhs = simulate_transient(m, p1, z).temps + simulate_transient(m, p2, z).temps;
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(SimulateTransient, PropertySteadyStateFixpoint) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto fp = Floorplan::grid("g", 1 + trial % 3, 2 + trial % 2, 60.0);
    const ModelMatrices m = build_ground_truth_model(fp);
    const Index n = m.size();
    const Vector p = oracle::random_nonneg(n, 1, rng, 5.0).col(0) + Vector::Constant(n, 0.1);
    // rho^K < 1e-7 is plenty for a 1e-5 relative bound.
    const double rho = spectral_radius(m.a);
    const auto k = static_cast<Index>(std::ceil(std::log(1e-7) / std::log(rho))) + 1;
    PowerTrace trace;
    trace.powers = p.replicate(1, k);
    const ThermalTrace t = simulate_transient(m, trace, Vector::Zero(n));
    const Vector rp = m.r * p;
    EXPECT_LT((t.temps.col(k - 1) - rp).norm() / rp.norm(), 1e-5);
  }
}

TEST(SteadyState, ZeroAndIdentityCases) {
  const ModelMatrices m = build_ground_truth_model(grid2x2());
  EXPECT_EQ(steady_state_temperature(m, Vector::Zero(4)).norm(), 0.0);
  ModelMatrices id;
  id.a = Matrix::Zero(3, 3);
  id.b = Matrix::Identity(3, 3);
  id.r = Matrix::Identity(3, 3);
  const Vector p(Vector::LinSpaced(3, 1.0, 3.0));
  EXPECT_EQ(steady_state_temperature(id, p), p);
}

TEST(SteadyState, AgreesWithRecurrenceAndIsDiagonallyDominant) {
  const ModelMatrices m = build_ground_truth_model(grid2x2());
  Vector p = Vector::Zero(4);
  p(3) = 15.0;
  const Vector t = steady_state_temperature(m, p);
  EXPECT_LT(((Matrix::Identity(4, 4) - m.a) * t - m.b * p).norm(), 1e-9 * t.norm());
  Index hottest = 0;
  t.maxCoeff(&hottest);
  EXPECT_EQ(hottest, 3);
  const Vector oracle_t = oracle::invert(Matrix::Identity(4, 4) - m.a) * m.b * p;
  EXPECT_LT((t - oracle_t).norm(), 1e-10);
}

TEST(SteadyState, RejectsBadInput) {
  const ModelMatrices m = build_ground_truth_model(grid2x2());
  EXPECT_THROW(steady_state_temperature(m, Vector::Zero(3)), InvalidInput);
  EXPECT_THROW(steady_state_temperature(m, -Vector::Ones(4)), InvalidInput);
}

TEST(SteadyDataset, NoiselessOneHotMatchesResistanceColumns) {
  const auto fp = grid2x2();
  const ModelMatrices m = build_ground_truth_model(fp);
  const ExperimentPlan plan = ExperimentPlan::one_hot(4, 1, 7.5);
  const SteadyStateDataset ds = generate_steady_dataset(m, fp, plan, 0.0, 0, 1);
  ASSERT_EQ(ds.observations(), 4);
  for (Index j = 0; j < 4; ++j) {
    EXPECT_LT((ds.t_s.col(j) - 7.5 * m.r.col(j)).norm(), 1e-12);
    EXPECT_DOUBLE_EQ(ds.p_total(j), 7.5);
  }
}

TEST(SteadyDataset, OutliersAreFlaggedAndScaled) {
  const auto fp = grid2x2();
  const ModelMatrices m = build_ground_truth_model(fp);
  const ExperimentPlan plan = ExperimentPlan::one_hot(4, 5, 10.0);  // m = 20
  const SteadyStateDataset ds = generate_steady_dataset(m, fp, plan, 0.0, 2, 9);
  ASSERT_EQ(ds.outlier_mask.size(), 22u);
  ASSERT_TRUE(ds.true_p_s.has_value());
  int flagged = 0;
  for (Index k = 0; k < ds.observations(); ++k) {
    if (!ds.outlier_mask[static_cast<std::size_t>(k)]) continue;
    ++flagged;
    const Vector clean = m.r * ds.true_p_s->col(k);
    EXPECT_GE(ds.t_s.col(k).norm(), 2.0 * clean.norm() - 1e-12);
    EXPECT_LE(ds.t_s.col(k).norm(), 4.0 * clean.norm() + 1e-12);
    EXPECT_DOUBLE_EQ(ds.p_total(k), ds.true_p_s->col(k).sum());
  }
  EXPECT_EQ(flagged, 2);
}

TEST(SteadyDataset, DeterministicPerSeedAndNonnegative) {
  const auto fp = Floorplan::grid("g", 2, 4, 60.0);
  const ModelMatrices m = build_ground_truth_model(fp);
  const ExperimentPlan plan = ExperimentPlan::one_hot(8, 6, 15.0);
  const auto a = generate_steady_dataset(m, fp, plan, 0.5, 3, 42);
  const auto b = generate_steady_dataset(m, fp, plan, 0.5, 3, 42);
  const auto c = generate_steady_dataset(m, fp, plan, 0.5, 3, 43);
  EXPECT_EQ(a.t_s, b.t_s);
  EXPECT_EQ(a.outlier_mask, b.outlier_mask);
  EXPECT_NE(a.t_s, c.t_s);
  EXPECT_GE(a.t_s.minCoeff(), 0.0);
}

TEST(SteadyDataset, RejectsPlanOverBudget) {
  const auto fp = grid2x2();
  const ModelMatrices m = build_ground_truth_model(fp);
  EXPECT_THROW(generate_steady_dataset(m, fp, ExperimentPlan::one_hot(4, 1, 61.0), 0.0, 0, 1),
               InvalidInput);
}

TEST(Workload, OneHotScheduleAndRandomScheduleRespectBudget) {
  const PowerTrace oh = one_hot_stress_schedule(3, 10, 4.0, 2);
  EXPECT_EQ(oh.steps(), 3 * 2 * 10 * 2);
  for (Index k = 0; k < oh.steps(); ++k) EXPECT_LE((oh.powers.col(k).array() > 0).count(), 1);

  const auto fp = Floorplan::grid("g", 2, 4, 60.0);
  const PowerTrace w = random_stress_schedule(fp, 500, 3);
  EXPECT_EQ(w.steps(), 500);
  EXPECT_GT(w.powers.minCoeff(), 0.0);
  EXPECT_LE(w.totals().maxCoeff(), 60.0 + 1e-12);
  EXPECT_EQ(w.powers, random_stress_schedule(fp, 500, 3).powers);
}
