#include "bpi/identify.hpp"
#include "bpi/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bpi {

namespace {

double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double lo = sv(sv.size() - 1);
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / lo;
}

std::string unit_name(const std::vector<std::string>& ids, Index i) {
  if (i >= 0 && static_cast<std::size_t>(i) < ids.size()) return ids[static_cast<std::size_t>(i)];
  return "#" + std::to_string(i);
}

Matrix select_columns(const Matrix& m, const std::vector<bool>& keep) {
  const auto count = static_cast<Index>(std::count(keep.begin(), keep.end(), true));
  Matrix out(m.rows(), count);
  Index w = 0;
  for (Index k = 0; k < m.cols(); ++k) {
    if (keep[static_cast<std::size_t>(k)]) out.col(w++) = m.col(k);
  }
  return out;
}

Vector select_entries(const Vector& v, const std::vector<bool>& keep) {
  return select_columns(v.transpose(), keep).transpose();
}

}  // namespace

IdentifiedModel offline_identify(const SteadyStateDataset& ds,
                                 std::span<const TransientPair> transients,
                                 const IdentifyOptions& options) {
  const Index n = ds.units();
  const Index m = ds.observations();
  require(n >= 1, "offline_identify: empty dataset");
  require(ds.p_total.size() == m, "offline_identify: p_total length != observations");
  if (m < n) {
    throw InvalidInput("offline_identify: need at least " + std::to_string(n) +
                       " steady-state observations, got " + std::to_string(m));
  }
  require(!transients.empty(), "offline_identify: need at least one transient pair");
  for (const auto& tp : transients) {
    require(tp.power.units() == n && tp.temps.units() == n,
            "offline_identify: transient unit count != dataset unit count");
    require(tp.power.steps() == tp.temps.steps(),
            "offline_identify: transient power and temperature lengths differ");
    if (tp.temps.steps() < n + 1) {
      throw InvalidInput("offline_identify: transient has " + std::to_string(tp.temps.steps()) +
                         " steps, need at least n+1 = " + std::to_string(n + 1));
    }
  }

  IdentifiedModel out;
  out.init_strategy = options.strategy;
  if (!transients.front().temps.unit_ids.empty()) out.unit_ids = transients.front().temps.unit_ids;
  auto& diag = out.diagnostics;
  diag.observations = m;

  Matrix t_used = ds.t_s;
  Vector p_used = ds.p_total;
  diag.kept_mask.assign(static_cast<std::size_t>(m), true);
  NmfSeed seed;
  switch (options.strategy) {
    case InitStrategy::identity:
      seed = init_identity(ds.t_s, ds.p_total);
      break;
    case InitStrategy::bpiss:
      seed = init_bpiss(ds.t_s, ds.p_total, ds.stressed_unit);
      break;
    case InitStrategy::random:
      seed = init_random(n, m, options.nmf.seed);
      break;
    case InitStrategy::dbscan: {
      DbscanSeed ds_seed = init_dbscan(ds.t_s, ds.p_total, options.dbscan, ds.stressed_unit);
      diag.kept_mask = ds_seed.kept_mask;
      t_used = select_columns(ds.t_s, ds_seed.kept_mask);
      p_used = select_entries(ds.p_total, ds_seed.kept_mask);
      diag.notes = std::move(ds_seed.diagnostics);
      seed.r0 = std::move(ds_seed.r0);
      seed.p0 = std::move(ds_seed.p0);
      break;
    }
  }
  diag.kept_observations = t_used.cols();

  if (options.settle_p) {
    Matrix settled = nnls_columns(seed.r0, t_used);
    if ((settled.rowwise().maxCoeff().array() > 0.0).all()) {
      seed.p0 = std::move(settled);
    } else {
      diag.notes.emplace_back("settle_p skipped: a source would carry no power");
    }
  }

  NmfResult nmf = factorize(t_used, std::move(seed.r0), std::move(seed.p0), options.nmf,
                            options.strategy);
  try {
    nmf = resolve_scale(std::move(nmf), p_used);
  } catch (const NumericalError& e) {
    // Sources keep the seed's unit order for every strategy but random.
    std::string msg = e.what();
    const auto pos = msg.find("source ");
    if (pos != std::string::npos) {
      const Index src = std::stol(msg.substr(pos + 7));
      msg += " (unit " + unit_name(out.unit_ids, src) + ")";
    }
    throw NumericalError(msg);
  }
  diag.objective_history = nmf.objective_history;
  diag.nmf_iters = nmf.iters_used;
  diag.source_scale = nmf.scale;
  Matrix r = nmf.r_hat;

  // Stack T(k) - r P(k) = a (T(k-1) - r P(k)) over every transient step.
  Index rows = 0;
  for (const auto& tp : transients) rows += tp.temps.steps() - 1;
  Matrix x(rows, n);
  Matrix y(rows, n);
  Index row = 0;
  for (const auto& tp : transients) {
    const Index k_steps = tp.temps.steps();
    const Matrix rp = r * tp.power.powers.rightCols(k_steps - 1);
    x.middleRows(row, k_steps - 1) = (tp.temps.temps.leftCols(k_steps - 1) - rp).transpose();
    y.middleRows(row, k_steps - 1) = (tp.temps.temps.rightCols(k_steps - 1) - rp).transpose();
    row += k_steps - 1;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  if (qr.rank() < n) {
    throw NumericalError("offline_identify: rank-deficient a regression (rank " +
                         std::to_string(qr.rank()) + " < " + std::to_string(n) +
                         "); transients do not excite every unit");
  }
  Matrix a = qr.solve(y).transpose();
  if (!a.allFinite()) throw NumericalError("offline_identify: non-finite a estimate");
  const double y_norm = y.norm();
  diag.a_fit_residual = y_norm > 0.0 ? (x * a.transpose() - y).norm() / y_norm : 0.0;

  diag.a_clipped = (a.array() < 0.0).count();
  a = a.cwiseMax(0.0);
  const double rho = spectral_radius(a);
  if (rho > 0.999) {
    diag.a_shrink = 0.999 / rho;
    a *= diag.a_shrink;
  }

  const Matrix i_minus_a = Matrix::Identity(n, n) - a;
  Matrix b = i_minus_a * r;
  // Roundoff-sized negatives are zeroed without being counted.
  const double b_tol = 1e-12 * b.cwiseAbs().maxCoeff();
  diag.b_clipped = (b.array() < -b_tol).count();
  b = b.cwiseMax(0.0);
  if (diag.b_clipped > 0) {
    diag.notes.push_back(std::to_string(diag.b_clipped) + " negative entries of b clipped");
  }
  {
    const Matrix r_implied = i_minus_a.partialPivLu().solve(b);
    const double r_norm = r.norm();
    diag.model_residual = r_norm > 0.0 ? (r_implied - r).norm() / r_norm : 0.0;
  }

  diag.p_hat = std::move(nmf.p_hat);
  const double t_norm = t_used.norm();
  diag.steady_residual = t_norm > 0.0 ? (t_used - r * diag.p_hat).norm() / t_norm : 0.0;

  out.matrices = ModelMatrices{std::move(a), std::move(b), std::move(r)};
  return out;
}

OnlineEstimate online_estimate(const ModelMatrices& model, const ThermalTrace& t_r,
                               const Vector& p_total, bool rescale) {
  const Index n = model.size();
  const Index k_steps = t_r.steps();
  require(t_r.units() == n, "online_estimate: trace unit count != model size");
  require(k_steps >= 2, "online_estimate: need at least 2 steps");
  require(p_total.size() == k_steps, "online_estimate: total power length != trace length");
  require(t_r.temps.allFinite(), "online_estimate: non-finite temperature");

  const double cond_b = condition_number(model.b);
  if (!(cond_b < kMaxConditionNumber)) {
    std::ostringstream msg;
    msg << "online_estimate: b is singular or ill-conditioned (cond ~ " << cond_b << ")";
    throw NumericalError(msg.str());
  }
  const double cond_r = condition_number(model.r);

  OnlineEstimate est;
  est.first_step = cond_r < kMaxConditionNumber ? 0 : 1;
  est.rescaled = rescale;
  est.p_est.dt = t_r.dt;
  est.p_est.powers.resize(n, k_steps - est.first_step);

  const Matrix rhs = t_r.temps.rightCols(k_steps - 1) - model.a * t_r.temps.leftCols(k_steps - 1);
  est.p_est.powers.rightCols(k_steps - 1) = model.b.partialPivLu().solve(rhs);
  if (est.first_step == 0) {
    est.p_est.powers.col(0) = model.r.partialPivLu().solve(t_r.temps.col(0));
  }

  auto& p = est.p_est.powers;
  const Index negatives = (p.array() < 0.0).count();
  est.clamped_fraction = static_cast<double>(negatives) / static_cast<double>(p.size());
  p = p.cwiseMax(0.0);

  if (rescale) {
    for (Index c = 0; c < p.cols(); ++c) {
      const double target = p_total(c + est.first_step);
      const double sum = p.col(c).sum();
      if (sum > 0.0) {
        p.col(c) *= target / sum;
      } else {
        p.col(c).setConstant(target / static_cast<double>(n));
      }
    }
  }
  return est;
}

double estimation_error(const PowerTrace& est, const PowerTrace& truth) {
  require(est.powers.rows() == truth.powers.rows() && est.powers.cols() == truth.powers.cols(),
          "estimation_error: shape mismatch");
  const double total = truth.powers.sum();
  require(total > 0.0, "estimation_error: true power is all zero");
  return 100.0 * (est.powers - truth.powers).cwiseAbs().sum() / total;
}

double estimation_error(const OnlineEstimate& est, const PowerTrace& truth) {
  PowerTrace aligned;
  aligned.dt = truth.dt;
  aligned.powers = truth.powers.rightCols(truth.steps() - est.first_step);
  return estimation_error(est.p_est, aligned);
}

}  // namespace bpi
