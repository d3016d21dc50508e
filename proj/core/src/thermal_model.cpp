#include "bpi/thermal_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace bpi {

ExperimentPlan ExperimentPlan::one_hot(Index units, Index repeats, double watts) {
  require(units >= 1 && repeats >= 1, "one_hot plan: units and repeats must be >= 1");
  require(watts > 0.0, "one_hot plan: watts must be > 0");
  ExperimentPlan plan;
  plan.powers = Matrix::Zero(units, units * repeats);
  for (Index u = 0; u < units; ++u) {
    for (Index r = 0; r < repeats; ++r) {
      const Index col = u * repeats + r;
      plan.powers(u, col) = watts;
      plan.stressed_unit.push_back(u);
    }
  }
  return plan;
}

double spectral_radius(const Matrix& m) {
  require(m.rows() == m.cols(), "spectral_radius: matrix must be square");
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

void validate_model(const ModelMatrices& model, bool check_resistance, double tol) {
  const Index n = model.a.rows();
  require(n >= 1, "model: empty");
  for (const Matrix* m : {&model.a, &model.b, &model.r}) {
    require(m->rows() == n && m->cols() == n, "model: a, b, r must all be n x n");
    require(m->allFinite(), "model: non-finite entry");
    require((m->array() >= 0.0).all(), "model: negative entry");
  }
  require(spectral_radius(model.a) < 1.0, "model: spectral radius of a must be < 1");
  if (check_resistance) {
    const Matrix lhs = (Matrix::Identity(n, n) - model.a) * model.r;
    const double scale = std::max(model.b.norm(), 1e-300);
    require((lhs - model.b).norm() <= tol * scale, "model: (I - a) r != b");
  }
}

ModelMatrices build_ground_truth_model(const Floorplan& fp, double self_heat,
                                       double coupling, double leak) {
  require(self_heat > 0.0, "build_ground_truth_model: self_heat must be > 0");
  require(coupling >= 0.0 && coupling < 1.0, "build_ground_truth_model: coupling must be in [0, 1)");
  require(leak > 0.0 && leak < 1.0, "build_ground_truth_model: leak must be in (0, 1)");
  const double worst = coupling * static_cast<double>(fp.max_degree()) + leak;
  if (!(worst < 1.0)) {
    throw InvalidInput("build_ground_truth_model: coupling*max_degree + leak = " +
                       std::to_string(worst) + " must be < 1");
  }

  const Index n = static_cast<Index>(fp.size());
  ModelMatrices model;
  model.a = Matrix::Zero(n, n);
  model.b = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    model.a(i, i) = 1.0 - leak - coupling * static_cast<double>(fp.degree(ui));
    for (std::size_t j : fp.neighbors(ui)) model.a(i, static_cast<Index>(j)) = coupling;
    model.b(i, i) = self_heat * fp.units()[ui].self_heat_scale * leak;
  }
  model.r = (Matrix::Identity(n, n) - model.a).partialPivLu().solve(model.b);
  // Roundoff can leave -0 or -1e-18 on structurally zero entries.
  model.r = model.r.cwiseMax(0.0);
  validate_model(model, true);

  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (model.r(i, j) > model.r(i, i) * (1.0 + 1e-12)) {
        throw InvalidInput("build_ground_truth_model: r is not diagonally dominant at (" +
                           std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
  return model;
}

ModelMatrices build_ground_truth_model(const Floorplan& fp) {
  const auto& t = fp.thermal();
  return build_ground_truth_model(fp, t.self_heat_k_per_w, t.coupling, t.leak);
}

ThermalTrace simulate_transient(const ModelMatrices& model, const PowerTrace& p,
                                const Vector& t0) {
  const Index n = model.size();
  require(p.powers.rows() == n, "simulate_transient: power trace has " +
                                    std::to_string(p.powers.rows()) + " rows, model has " +
                                    std::to_string(n));
  require(t0.size() == n, "simulate_transient: t0 has wrong length");
  require((t0.array() >= 0.0).all(), "simulate_transient: t0 must be >= 0");
  require((p.powers.array() >= 0.0).all(), "simulate_transient: power must be >= 0");

  ThermalTrace out;
  out.dt = p.dt;
  out.temps.resize(n, p.steps());
  Vector prev = t0;
  for (Index k = 0; k < p.steps(); ++k) {
    out.temps.col(k).noalias() = model.a * prev + model.b * p.powers.col(k);
    prev = out.temps.col(k);
  }
  return out;
}

Vector steady_state_temperature(const ModelMatrices& model, const Vector& p_s) {
  require(p_s.size() == model.size(), "steady_state_temperature: dimension mismatch");
  require((p_s.array() >= 0.0).all(), "steady_state_temperature: p_s must be >= 0");
  return model.r * p_s;
}

SteadyStateDataset generate_steady_dataset(const ModelMatrices& model, const Floorplan& fp,
                                           const ExperimentPlan& plan, double noise_sigma,
                                           Index outlier_count, std::uint64_t seed) {
  const Index n = model.size();
  const Index m = plan.observations();
  require(plan.powers.rows() == n, "generate_steady_dataset: plan rows != model size");
  require(static_cast<Index>(plan.stressed_unit.size()) == m,
          "generate_steady_dataset: stressed_unit length != observations");
  require(m >= n, "generate_steady_dataset: need at least n observations");
  require(noise_sigma >= 0.0, "generate_steady_dataset: noise_sigma must be >= 0");
  require(outlier_count >= 0, "generate_steady_dataset: outlier_count must be >= 0");
  require((plan.powers.array() >= 0.0).all(), "generate_steady_dataset: negative plan power");
  for (Index k = 0; k < m; ++k) {
    const double total = plan.powers.col(k).sum();
    if (total > fp.power_budget_w() * (1.0 + 1e-12)) {
      throw InvalidInput("generate_steady_dataset: observation " + std::to_string(k) +
                         " draws " + std::to_string(total) + " W, budget is " +
                         std::to_string(fp.power_budget_w()) + " W");
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> factor(2.0, 4.0);
  std::uniform_int_distribution<Index> pick(0, m - 1);

  const Index total = m + outlier_count;
  SteadyStateDataset ds;
  ds.t_s.resize(n, total);
  Matrix true_p(n, total);
  ds.outlier_mask.assign(static_cast<std::size_t>(total), false);
  ds.stressed_unit.resize(static_cast<std::size_t>(total));

  auto noisy = [&](const Vector& clean) {
    Vector t = clean;
    if (noise_sigma > 0.0) {
      for (Index i = 0; i < n; ++i) t(i) = std::max(0.0, t(i) + noise_sigma * noise(rng));
    }
    return t;
  };

  for (Index k = 0; k < m; ++k) {
    true_p.col(k) = plan.powers.col(k);
    ds.t_s.col(k) = noisy(model.r * plan.powers.col(k));
    ds.stressed_unit[static_cast<std::size_t>(k)] = plan.stressed_unit[static_cast<std::size_t>(k)];
  }
  for (Index o = 0; o < outlier_count; ++o) {
    const Index src = pick(rng);
    const Index k = m + o;
    true_p.col(k) = plan.powers.col(src);
    const double scale = factor(rng);
    ds.t_s.col(k) = scale * noisy(model.r * plan.powers.col(src));
    ds.outlier_mask[static_cast<std::size_t>(k)] = true;
    ds.stressed_unit[static_cast<std::size_t>(k)] = plan.stressed_unit[static_cast<std::size_t>(src)];
  }
  ds.p_total = true_p.colwise().sum().transpose();
  ds.true_p_s = std::move(true_p);
  return ds;
}

}  // namespace bpi
