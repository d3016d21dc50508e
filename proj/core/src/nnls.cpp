#include "bpi/nnls.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace bpi {

namespace {

Vector solve_passive(const Matrix& gram, const Vector& rhs, const std::vector<Index>& passive) {
  const auto k = static_cast<Index>(passive.size());
  Matrix sub(k, k);
  Vector sub_rhs(k);
  for (Index i = 0; i < k; ++i) {
    sub_rhs(i) = rhs(passive[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < k; ++j) {
      sub(i, j) = gram(passive[static_cast<std::size_t>(i)], passive[static_cast<std::size_t>(j)]);
    }
  }
  const Vector z = sub.ldlt().solve(sub_rhs);
  Vector full = Vector::Zero(gram.cols());
  for (Index i = 0; i < k; ++i) full(passive[static_cast<std::size_t>(i)]) = z(i);
  return full;
}

}  // namespace

Vector nnls_gram(const Matrix& gram, const Vector& rhs) {
  const Index n = gram.cols();
  require(gram.rows() == n && rhs.size() == n, "nnls: dimension mismatch");
  require(gram.allFinite() && rhs.allFinite(), "nnls: non-finite input");

  const double tol = 1e-13 * std::max({gram.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff(),
                                       std::numeric_limits<double>::min()});
  const int max_iter = static_cast<int>(3 * n + 10);

  Vector x = Vector::Zero(n);
  std::vector<bool> in_passive(static_cast<std::size_t>(n), false);
  std::vector<Index> passive;
  Vector w = rhs;

  for (int outer = 0; outer < max_iter; ++outer) {
    Index t = -1;
    double best = tol;
    for (Index j = 0; j < n; ++j) {
      if (!in_passive[static_cast<std::size_t>(j)] && w(j) > best) {
        best = w(j);
        t = j;
      }
    }
    if (t < 0) break;
    in_passive[static_cast<std::size_t>(t)] = true;
    passive.push_back(t);

    Vector s = solve_passive(gram, rhs, passive);
    for (int inner = 0; inner < max_iter; ++inner) {
      double alpha = std::numeric_limits<double>::infinity();
      bool feasible = true;
      for (Index j : passive) {
        if (s(j) <= 0.0) {
          feasible = false;
          const double denom = x(j) - s(j);
          alpha = std::min(alpha, denom > 0.0 ? x(j) / denom : 0.0);
        }
      }
      if (feasible) break;
      x += alpha * (s - x);
      std::vector<Index> kept;
      for (Index j : passive) {
        if (x(j) <= 0.0 || (s(j) <= 0.0 && x(j) <= tol)) {
          in_passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        } else {
          kept.push_back(j);
        }
      }
      passive = std::move(kept);
      s = solve_passive(gram, rhs, passive);
    }
    x = s;
    w = rhs - gram * x;
  }
  return x.cwiseMax(0.0);
}

Vector nnls(const Matrix& a, const Vector& b) {
  require(a.rows() == b.size(), "nnls: dimension mismatch");
  return nnls_gram(a.transpose() * a, a.transpose() * b);
}

Matrix nnls_columns(const Matrix& r, const Matrix& t) {
  require(r.rows() == t.rows(), "nnls_columns: dimension mismatch");
  const Matrix gram = r.transpose() * r;
  const Matrix rhs = r.transpose() * t;
  Matrix p(r.cols(), t.cols());
  for (Index k = 0; k < t.cols(); ++k) p.col(k) = nnls_gram(gram, rhs.col(k));
  return p;
}

}  // namespace bpi
