#include "aapl/toyworld/encoders.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "aapl/error.hpp"
#include "aapl/numcore/ops.hpp"
#include "aapl/numcore/tape.hpp"
#include "aapl/toyworld/dataset.hpp"

namespace aapl::toyworld {

namespace ops = numcore::ops;

namespace {

constexpr double kImageGain = 1.0;
constexpr double kTextGain = 3.0;
constexpr double kBiasSigma = 0.1;
constexpr double kFeatureRadius = 1.0;  // target norm of aligned image features
constexpr double kRidge = 0.05;

std::vector<double> gaussian(std::size_t n, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

}  // namespace

FrozenEncoders::FrozenEncoders(const EncoderConfig& cfg) : cfg_(cfg) {
  if (cfg.feature_dim < 2 || cfg.context_length < 1 || cfg.text_hidden < 1 ||
      cfg.image_size < 1 || cfg.num_classes < 1) {
    throw ConfigError("FrozenEncoders: dimensions must be positive");
  }
  if (!(cfg.temperature > 0.0)) throw ConfigError("FrozenEncoders: temperature must be > 0");

  const auto d = static_cast<std::size_t>(cfg.feature_dim);
  const auto h = static_cast<std::size_t>(cfg.text_hidden);
  const auto pixels = static_cast<std::size_t>(cfg.image_size * cfg.image_size * 3);
  std::mt19937_64 rng(cfg.seed);

  auto img_w = gaussian(d * pixels, kImageGain / std::sqrt(static_cast<double>(pixels)), rng);
  auto img_b = gaussian(d, kBiasSigma, rng);
  text_in_ = Tensor::matrix(h, d, gaussian(h * d, kTextGain / std::sqrt(static_cast<double>(d)), rng));
  text_in_bias_ = Tensor::vector(gaussian(h, kBiasSigma, rng));
  text_out_ = Tensor::matrix(d, h, gaussian(d * h, 1.0 / std::sqrt(static_cast<double>(h)), rng));
  text_out_bias_ = Tensor::vector(gaussian(d, kBiasSigma, rng));

  for (int c = 0; c < cfg.num_classes; ++c) {
    auto v = gaussian(d, 1.0, rng);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    class_embeddings_.push_back(Tensor::vector(std::move(v)));
  }

  if (cfg.alignment > 0.0) {
    // Ridge fit of an extra linear term so that rendered samples of class i
    // land on atanh(radius * u_i), u_i the unit text feature of [0..0, c_i].
    const int per_class = cfg.alignment_samples_per_class;
    const auto n = static_cast<Eigen::Index>(per_class * cfg.num_classes);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(pixels), n);
    Eigen::MatrixXd residual(static_cast<Eigen::Index>(d), n);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w_rand(
        img_w.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(pixels));
    Eigen::Map<const Eigen::VectorXd> b(img_b.data(), static_cast<Eigen::Index>(d));

    Eigen::Index col = 0;
    for (int c = 0; c < cfg.num_classes; ++c) {
      auto zero_ctx = Tensor::zeros({static_cast<std::size_t>(cfg.context_length), d});
      std::vector<Tensor> rows{zero_ctx, ops::reshape(class_embeddings_[static_cast<std::size_t>(c)], {1, d})};
      auto text = encode_text(ops::concat(rows));
      double norm = 0.0;
      for (double v : text.data()) norm += v * v;
      norm = std::sqrt(norm);
      Eigen::VectorXd target(static_cast<Eigen::Index>(d));
      for (std::size_t j = 0; j < d; ++j) {
        target(static_cast<Eigen::Index>(j)) =
            std::atanh(std::clamp(kFeatureRadius * text[j] / norm, -0.95, 0.95));
      }
      for (int i = 0; i < per_class; ++i, ++col) {
        ToyImage img = render_class_image(c, cfg.image_size, rng);
        x.col(col) = Eigen::Map<const Eigen::VectorXd>(img.pixels.data(),
                                                       static_cast<Eigen::Index>(pixels));
        residual.col(col) = target - w_rand * x.col(col) - b;
      }
    }
    Eigen::MatrixXd gram = x.transpose() * x;
    const double lambda = kRidge * gram.trace() / static_cast<double>(n);
    gram.diagonal().array() += lambda;
    Eigen::MatrixXd dual = gram.ldlt().solve(residual.transpose());  // [n, d]
    Eigen::MatrixXd w_align = (x * dual).transpose();                 // [d, pixels]
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t p = 0; p < pixels; ++p) {
        img_w[r * pixels + p] +=
            cfg.alignment * w_align(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(p));
      }
    }
  }
  image_weight_ = Tensor::matrix(d, pixels, std::move(img_w));
  image_bias_ = Tensor::vector(std::move(img_b));
}

Tensor FrozenEncoders::encode_image(const ToyImage& img) const {
  if (img.height != static_cast<std::size_t>(cfg_.image_size) ||
      img.width != static_cast<std::size_t>(cfg_.image_size) ||
      img.pixels.size() != img.height * img.width * 3) {
    throw ShapeError("encode_image: image is " + std::to_string(img.height) + "x" +
                     std::to_string(img.width) + ", encoder expects " +
                     std::to_string(cfg_.image_size) + "x" + std::to_string(cfg_.image_size));
  }
  const auto d = static_cast<std::size_t>(cfg_.feature_dim);
  const auto pixels = img.pixels.size();
  auto w = image_weight_.data();
  auto b = image_bias_.data();
  std::vector<double> out(d);
  for (std::size_t r = 0; r < d; ++r) {
    double acc = b[r];
    const double* row = w.data() + r * pixels;
    for (std::size_t p = 0; p < pixels; ++p) acc += row[p] * img.pixels[p];
    out[r] = std::tanh(acc);
  }
  return Tensor::vector(std::move(out));
}

Tensor FrozenEncoders::encode_text(const Tensor& prompt) const {
  const auto rows = static_cast<std::size_t>(cfg_.context_length + 1);
  const auto d = static_cast<std::size_t>(cfg_.feature_dim);
  if (prompt.shape() != numcore::Shape{rows, d}) {
    throw ShapeError("encode_text: expected prompt " + numcore::shape_to_string({rows, d}) +
                     ", got " + numcore::shape_to_string(prompt.shape()));
  }
  auto pooled = ops::mean_rows(prompt);
  auto hidden = ops::tanh(ops::add(ops::matmul(text_in_, pooled), text_in_bias_));
  return ops::add(ops::matmul(text_out_, hidden), text_out_bias_);
}

const Tensor& FrozenEncoders::class_embedding(int class_id) const {
  if (class_id < 0 || class_id >= cfg_.num_classes) {
    throw ConfigError("class_embedding: class id " + std::to_string(class_id) + " out of range");
  }
  return class_embeddings_[static_cast<std::size_t>(class_id)];
}

void FrozenEncoders::set_temperature(double tau) {
  if (!(tau > 0.0)) throw ConfigError("FrozenEncoders: temperature must be > 0");
  cfg_.temperature = tau;
}

std::vector<double> FrozenEncoders::weight_snapshot() const {
  std::vector<double> out;
  for (const Tensor* t : {&image_weight_, &image_bias_, &text_in_, &text_in_bias_, &text_out_,
                          &text_out_bias_}) {
    out.insert(out.end(), t->data().begin(), t->data().end());
  }
  for (const auto& c : class_embeddings_) out.insert(out.end(), c.data().begin(), c.data().end());
  return out;
}

}  // namespace aapl::toyworld
