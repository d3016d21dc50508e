#include "bpi/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

namespace bpi {

DbscanParams DbscanParams::for_dimension(double eps, std::size_t dim) {
  DbscanParams p;
  p.eps = eps;
  p.min_pts = std::max<std::size_t>(2, dim + 1);
  p.k = p.min_pts - 1;
  return p;
}

void DbscanParams::validate() const {
  require(std::isfinite(eps) && eps > 0.0, "dbscan: eps must be > 0");
  require(min_pts >= 2, "dbscan: min_pts must be >= 2");
  require(k >= 1, "dbscan: k must be >= 1");
}

std::size_t ClusterAssignment::noise_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
}

std::vector<std::size_t> ClusterAssignment::cluster_sizes() const {
  std::vector<std::size_t> sizes(cluster_count(), 0);
  for (int l : labels) {
    if (l != kNoise) ++sizes[static_cast<std::size_t>(l)];
  }
  return sizes;
}

double distance(const Eigen::Ref<const Vector>& p, const Eigen::Ref<const Vector>& q) {
  require(p.size() == q.size(), "distance: dimension mismatch");
  return (p - q).norm();
}

Matrix pairwise_distances(const Matrix& points) {
  const Index m = points.cols();
  Matrix d = Matrix::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      d(i, j) = d(j, i) = (points.col(i) - points.col(j)).norm();
    }
  }
  return d;
}

ClusterAssignment dbscan(const Matrix& points, const DbscanParams& params) {
  params.validate();
  require(points.cols() >= 1, "dbscan: need at least one point");
  require(points.allFinite(), "dbscan: non-finite coordinates");
  return dbscan(points, pairwise_distances(points), params);
}

ClusterAssignment dbscan(const Matrix& points, const Matrix& d, const DbscanParams& params) {
  params.validate();
  const Index m = points.cols();
  require(m >= 1, "dbscan: need at least one point");
  require(d.rows() == m && d.cols() == m, "dbscan: distance matrix does not match points");

  std::vector<std::vector<Index>> neighbors(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      if (d(i, j) <= params.eps) neighbors[static_cast<std::size_t>(i)].push_back(j);
    }
  }

  ClusterAssignment out;
  out.labels.assign(static_cast<std::size_t>(m), kNoise);
  out.core_flags.assign(static_cast<std::size_t>(m), false);
  for (Index i = 0; i < m; ++i) {
    out.core_flags[static_cast<std::size_t>(i)] =
        neighbors[static_cast<std::size_t>(i)].size() >= params.min_pts;
  }

  // Core points: connected components of the core graph, numbered by their
  // lowest index.
  int clusters = 0;
  for (Index seed = 0; seed < m; ++seed) {
    const auto s = static_cast<std::size_t>(seed);
    if (!out.core_flags[s] || out.labels[s] != kNoise) continue;
    const int id = clusters++;
    std::deque<Index> frontier{seed};
    out.labels[s] = id;
    while (!frontier.empty()) {
      const auto p = static_cast<std::size_t>(frontier.front());
      frontier.pop_front();
      for (Index q : neighbors[p]) {
        const auto uq = static_cast<std::size_t>(q);
        if (out.core_flags[uq] && out.labels[uq] == kNoise) {
          out.labels[uq] = id;
          frontier.push_back(q);
        }
      }
    }
  }

  // Border points follow their lowest-indexed core neighbour.
  for (Index i = 0; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (out.core_flags[ui]) continue;
    for (Index q : neighbors[ui]) {  // ascending
      if (out.core_flags[static_cast<std::size_t>(q)]) {
        out.labels[ui] = out.labels[static_cast<std::size_t>(q)];
        break;
      }
    }
  }

  out.centroids = centroids_of(points, out);
  return out;
}

KDistanceResult k_distance_epsilon(const Matrix& points, std::size_t k) {
  const Index m = points.cols();
  require(k >= 1, "k_distance_epsilon: k must be >= 1");
  if (static_cast<Index>(k) >= m) {
    throw InvalidInput("k_distance_epsilon: need more than k=" + std::to_string(k) +
                       " points, got " + std::to_string(m));
  }
  require(points.allFinite(), "k_distance_epsilon: non-finite coordinates");
  return k_distance_epsilon_from(pairwise_distances(points), k);
}

KDistanceResult k_distance_epsilon_from(const Matrix& d, std::size_t k) {
  const Index m = d.cols();
  require(d.rows() == m, "k_distance_epsilon: distance matrix must be square");
  require(k >= 1, "k_distance_epsilon: k must be >= 1");
  if (static_cast<Index>(k) >= m) {
    throw InvalidInput("k_distance_epsilon: need more than k=" + std::to_string(k) +
                       " points, got " + std::to_string(m));
  }
  KDistanceResult out;
  out.sorted_desc.reserve(static_cast<std::size_t>(m));
  std::vector<double> row(static_cast<std::size_t>(m - 1));
  for (Index i = 0; i < m; ++i) {
    std::size_t w = 0;
    for (Index j = 0; j < m; ++j) {
      if (j != i) row[w++] = d(i, j);
    }
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    out.sorted_desc.push_back(row[k - 1]);
  }
  std::sort(out.sorted_desc.begin(), out.sorted_desc.end(), std::greater<>());

  const auto& s = out.sorted_desc;
  const double hi = s.front();
  const double lo = s.back();
  if (hi == 0.0) {
    out.degenerate = true;
    return out;
  }
  if (hi == lo) {
    out.eps = hi;
    return out;
  }

  // Distance to the chord (0,1)-(1,0) in normalized coordinates is
  // proportional to 1 - x - y; the curve lies on or below the chord.
  const double span = hi - lo;
  const double xs = static_cast<double>(m - 1);
  double best = -1.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = static_cast<double>(i) / xs;
    const double y = (s[i] - lo) / span;
    const double gap = 1.0 - x - y;
    if (gap > best) {
      best = gap;
      out.elbow_index = i;
    }
  }
  const std::size_t e = out.elbow_index;
  // Geometric midpoint: the two regimes often differ by orders of magnitude
  // and an arithmetic midpoint would sit far out in the sparse one.
  if (e == 0) {
    out.eps = s[0];
  } else if (s[e] > 0.0) {
    out.eps = std::sqrt(s[e] * s[e - 1]);
  } else {
    out.eps = 0.5 * s[e - 1];
  }
  return out;
}

Matrix centroids_of(const Matrix& points, const ClusterAssignment& assignment) {
  require(static_cast<Index>(assignment.labels.size()) == points.cols(),
          "centroids_of: assignment does not match points");
  int clusters = 0;
  for (int l : assignment.labels) clusters = std::max(clusters, l + 1);
  Matrix sums = Matrix::Zero(points.rows(), clusters);
  std::vector<Index> counts(static_cast<std::size_t>(clusters), 0);
  for (Index i = 0; i < points.cols(); ++i) {
    const int l = assignment.labels[static_cast<std::size_t>(i)];
    if (l == kNoise) continue;
    sums.col(l) += points.col(i);
    ++counts[static_cast<std::size_t>(l)];
  }
  for (int c = 0; c < clusters; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw InvalidInput("centroids_of: cluster " + std::to_string(c) + " has no members");
    }
    sums.col(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }
  return sums;
}

}  // namespace bpi
