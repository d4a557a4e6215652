#include "aapl/profiling/silhouette.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aapl/error.hpp"

namespace aapl::profiling {

namespace {

struct Clustering {
  std::vector<int> labels;         // distinct, ascending
  std::vector<std::size_t> index;  // per point: position in labels
  std::vector<std::size_t> size;
};

Clustering cluster_index(std::span<const double> points, std::size_t dim,
                         std::span<const int> labels) {
  if (dim == 0) throw ConfigError("silhouette_scores: zero dimension");
  if (points.size() != labels.size() * dim) {
    throw ShapeError("silhouette_scores: " + std::to_string(points.size()) + " values for " +
                     std::to_string(labels.size()) + " points of dim " + std::to_string(dim));
  }
  for (double v : points) {
    if (!std::isfinite(v)) throw NumericError("silhouette_scores: non-finite coordinate");
  }
  Clustering c;
  c.labels.assign(labels.begin(), labels.end());
  std::sort(c.labels.begin(), c.labels.end());
  c.labels.erase(std::unique(c.labels.begin(), c.labels.end()), c.labels.end());
  if (c.labels.size() < 2) throw ConfigError("silhouette_scores: need at least two clusters");
  c.size.assign(c.labels.size(), 0);
  c.index.reserve(labels.size());
  for (int l : labels) {
    auto pos = static_cast<std::size_t>(std::lower_bound(c.labels.begin(), c.labels.end(), l) -
                                        c.labels.begin());
    c.index.push_back(pos);
    ++c.size[pos];
  }
  return c;
}

inline double distance(const double* x, const double* y, std::size_t dim) {
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double diff = x[k] - y[k];
    s += diff * diff;
  }
  return std::sqrt(s);
}

// S(i) from the per-cluster distance sums of point i.
double point_score(std::span<const double> sums, const Clustering& c, std::size_t own) {
  if (c.size[own] < 2) return 0.0;
  const double a = sums[own] / static_cast<double>(c.size[own] - 1);
  double b = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sums.size(); ++k) {
    if (k != own) b = std::min(b, sums[k] / static_cast<double>(c.size[k]));
  }
  const double denom = std::max(a, b);
  return denom > 0.0 ? (b - a) / denom : 0.0;
}

SilhouetteResult aggregate(std::vector<double> per_point, const Clustering& c) {
  SilhouetteResult r;
  r.cluster_labels = c.labels;
  r.cluster_size = c.size;
  r.cluster_mean.assign(c.labels.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < per_point.size(); ++i) {
    r.cluster_mean[c.index[i]] += per_point[i];
    total += per_point[i];
  }
  for (std::size_t k = 0; k < c.labels.size(); ++k) {
    r.cluster_mean[k] /= static_cast<double>(c.size[k]);
    if (c.size[k] < 2) r.singleton_labels.push_back(c.labels[k]);
  }
  r.overall = total / static_cast<double>(per_point.size());
  r.per_point = std::move(per_point);
  return r;
}

}  // namespace

SilhouetteResult silhouette_scores(std::span<const double> points, std::size_t dim,
                                   std::span<const int> labels) {
  const Clustering c = cluster_index(points, dim, labels);
  const auto n = static_cast<std::ptrdiff_t>(labels.size());
  const std::size_t nc = c.labels.size();
  const auto un = static_cast<std::size_t>(n);

  // Distance matrix, upper triangle computed once and mirrored.
  std::vector<double> dist(un * un, 0.0);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (std::size_t j = ui + 1; j < un; ++j) {
      const double d = distance(&points[ui * dim], &points[j * dim], dim);
      dist[ui * un + j] = d;
      dist[j * un + ui] = d;
    }
  }

  std::vector<double> per_point(un, 0.0);
#pragma omp parallel
  {
    std::vector<double> sums(nc);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      std::fill(sums.begin(), sums.end(), 0.0);
      const double* row = &dist[ui * un];
      for (std::size_t j = 0; j < un; ++j) sums[c.index[j]] += row[j];
      per_point[ui] = point_score(sums, c, c.index[ui]);
    }
  }
  return aggregate(std::move(per_point), c);
}

SilhouetteResult silhouette_scores_serial(std::span<const double> points, std::size_t dim,
                                          std::span<const int> labels) {
  const Clustering c = cluster_index(points, dim, labels);
  const std::size_t n = labels.size();
  std::vector<double> per_point(n, 0.0);
  std::vector<double> sums(c.labels.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[c.index[j]] += distance(&points[i * dim], &points[j * dim], dim);
    }
    per_point[i] = point_score(sums, c, c.index[i]);
  }
  return aggregate(std::move(per_point), c);
}

}  // namespace aapl::profiling
