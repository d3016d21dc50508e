#pragma once

#include <cstddef>
#include <vector>

#include "bpi/types.hpp"

namespace bpi {

inline constexpr int kNoise = -1;

struct DbscanParams {
  double eps = 0.0;
  std::size_t min_pts = 2;
  // Neighbour rank used by the k-distance graph.
  std::size_t k = 1;

  // MinPts = dim + 1 and k = MinPts - 1.
  static DbscanParams for_dimension(double eps, std::size_t dim);

  void validate() const;
};

// Points are matrix columns throughout this module: an n x m matrix holds m
// points of dimension n.
struct ClusterAssignment {
  std::vector<int> labels;       // cluster index or kNoise, one per point
  Matrix centroids;              // n x c, column j is the mean of cluster j
  std::vector<bool> core_flags;

  std::size_t cluster_count() const { return static_cast<std::size_t>(centroids.cols()); }
  std::size_t noise_count() const;
  std::vector<std::size_t> cluster_sizes() const;
};

double distance(const Eigen::Ref<const Vector>& p, const Eigen::Ref<const Vector>& q);

// m x m Euclidean distances between columns, computed from coordinate
// differences so duplicates come out exactly zero.
Matrix pairwise_distances(const Matrix& points);

/// Density-based clustering over the columns of `points`.
///
/// A point is core when at least min_pts points (itself included) lie within
/// eps. Core points are grouped by density-reachability and clusters are
/// numbered by their lowest-indexed core point. A border point joins the
/// cluster of its lowest-indexed core neighbour. Everything else is noise.
ClusterAssignment dbscan(const Matrix& points, const DbscanParams& params);

// Same with distances from pairwise_distances(points).
ClusterAssignment dbscan(const Matrix& points, const Matrix& distances,
                         const DbscanParams& params);

struct KDistanceResult {
  double eps = 0.0;
  bool degenerate = false;        // every k-distance is zero
  std::size_t elbow_index = 0;    // index into sorted_desc
  std::vector<double> sorted_desc;
};

/// Picks eps from the k-distance graph.
///
/// Each point's distance to its k-th nearest other point is sorted in
/// descending order. The elbow is the entry farthest from the chord joining
/// the curve's endpoints, measured after normalizing both axes to [0, 1].
/// eps is the geometric midpoint of the gap between the elbow value and the
/// next larger distance, so it lies strictly between the dense and sparse
/// regimes (half the larger value when the dense side is exactly zero).
/// The result does not depend on point order.
KDistanceResult k_distance_epsilon(const Matrix& points, std::size_t k);

KDistanceResult k_distance_epsilon_from(const Matrix& distances, std::size_t k);

// n x c matrix of per-cluster means; noise is excluded.
Matrix centroids_of(const Matrix& points, const ClusterAssignment& assignment);

}  // namespace bpi
