#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aapl::profiling {

/// Per-point and per-cluster silhouette values under the Euclidean metric.
///
/// Clusters are the distinct labels present, in ascending label order.
/// a(i) is the mean distance to the other members of i's cluster, b(i) the
/// smallest mean distance to any other cluster, S(i) = (b - a) / max(a, b)
/// with 0/0 taken as 0. Members of single-point clusters score 0 and the
/// cluster is listed in `singleton_labels`.
struct SilhouetteResult {
  std::vector<double> per_point;
  std::vector<int> cluster_labels;
  std::vector<double> cluster_mean;
  std::vector<std::size_t> cluster_size;
  std::vector<int> singleton_labels;
  double overall = 0.0;  // mean over all points
};

// points: row-major [labels.size(), dim]. Throws ConfigError on fewer than two clusters.
SilhouetteResult silhouette_scores(std::span<const double> points, std::size_t dim,
                                   std::span<const int> labels);

// Same contract, single-threaded, no distance matrix. Kept as the reference
// for the OpenMP path and for benchmarking.
SilhouetteResult silhouette_scores_serial(std::span<const double> points, std::size_t dim,
                                          std::span<const int> labels);

}  // namespace aapl::profiling
