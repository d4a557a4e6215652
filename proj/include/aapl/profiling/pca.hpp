#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aapl::profiling {

struct PcaResult {
  std::size_t components = 0;          // axes actually returned (<= requested)
  std::vector<double> projected;       // row-major [n, components]
  std::vector<double> axes;            // row-major [components, dim], unit length
  std::vector<double> explained_ratio; // descending, one per returned axis
  std::vector<double> eigenvalues;     // all covariance eigenvalues, descending
  std::vector<double> mean;            // [dim]
  bool rank_deficient = false;         // fewer non-degenerate axes than requested
};

/// Projects centred points onto the leading eigenvectors of their covariance
/// (normalized by n). Axes whose eigenvalue is numerically zero are dropped.
PcaResult pca_project(std::span<const double> points, std::size_t dim, std::size_t out_dim = 2);

// Mean squared distance between each point and its reconstruction from the
// first `components` axes of `fit`.
double reconstruction_error(std::span<const double> points, std::size_t dim, const PcaResult& fit);

}  // namespace aapl::profiling
