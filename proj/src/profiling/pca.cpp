#include "aapl/profiling/pca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <string>

#include "aapl/error.hpp"

namespace aapl::profiling {

namespace {
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
constexpr double kRankTolerance = 1e-12;
}  // namespace

PcaResult pca_project(std::span<const double> points, std::size_t dim, std::size_t out_dim) {
  if (dim == 0 || out_dim == 0) throw ConfigError("pca_project: dimensions must be positive");
  if (points.size() % dim != 0) throw ShapeError("pca_project: point buffer not a multiple of dim");
  const std::size_t n = points.size() / dim;
  if (n < out_dim) {
    throw ConfigError("pca_project: " + std::to_string(n) + " points cannot give " +
                      std::to_string(out_dim) + " axes");
  }
  Eigen::Map<const RowMatrix> x(points.data(), static_cast<Eigen::Index>(n),
                                static_cast<Eigen::Index>(dim));
  const Eigen::RowVectorXd mu = x.colwise().mean();
  const RowMatrix centered = x.rowwise() - mu;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("pca_project: eigensolver failed");
  // Eigen sorts ascending.
  const Eigen::VectorXd values = solver.eigenvalues().reverse();
  const Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();

  PcaResult r;
  r.mean.assign(mu.data(), mu.data() + dim);
  const double total = values.cwiseMax(0.0).sum();
  for (Eigen::Index i = 0; i < values.size(); ++i) r.eigenvalues.push_back(std::max(values(i), 0.0));

  const double floor = kRankTolerance * std::max(total, 1e-300);
  std::size_t k = 0;
  while (k < out_dim && k < dim && values(static_cast<Eigen::Index>(k)) > floor) ++k;
  r.rank_deficient = k < out_dim;
  r.components = k;
  if (k == 0) return r;

  const Eigen::MatrixXd basis = vectors.leftCols(static_cast<Eigen::Index>(k));
  const RowMatrix proj = centered * basis;
  r.projected.assign(proj.data(), proj.data() + proj.size());
  const RowMatrix axes = basis.transpose();
  r.axes.assign(axes.data(), axes.data() + axes.size());
  for (std::size_t i = 0; i < k; ++i) r.explained_ratio.push_back(values(static_cast<Eigen::Index>(i)) / total);
  return r;
}

double reconstruction_error(std::span<const double> points, std::size_t dim, const PcaResult& fit) {
  const std::size_t n = points.size() / dim;
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> recon(fit.mean);
    for (std::size_t c = 0; c < fit.components; ++c) {
      double coef = 0.0;
      for (std::size_t j = 0; j < dim; ++j) coef += (points[i * dim + j] - fit.mean[j]) * fit.axes[c * dim + j];
      for (std::size_t j = 0; j < dim; ++j) recon[j] += coef * fit.axes[c * dim + j];
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const double diff = points[i * dim + j] - recon[j];
      err += diff * diff;
    }
  }
  return err / static_cast<double>(n);
}

}  // namespace aapl::profiling
