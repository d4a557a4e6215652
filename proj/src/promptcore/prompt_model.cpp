#include "aapl/promptcore/prompt_model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "aapl/error.hpp"
#include "aapl/numcore/ops.hpp"

namespace aapl::promptcore {

namespace ops = numcore::ops;

int default_bottleneck_ratio(int feature_dim) { return feature_dim >= 32 ? 16 : 4; }

PromptModel::PromptModel(const FrozenEncoders& encoders, const PromptConfig& cfg)
    : encoders_(&encoders) {
  const int d = encoders.feature_dim();
  const int m = encoders.context_length();
  const int r = cfg.bottleneck_ratio > 0 ? cfg.bottleneck_ratio : default_bottleneck_ratio(d);
  if (d % r != 0 || d / r < 1) {
    throw ConfigError("PromptModel: feature dim " + std::to_string(d) +
                      " is not divisible by bottleneck ratio " + std::to_string(r));
  }
  if (!(cfg.context_init_sigma >= 0.0)) throw ConfigError("PromptModel: context sigma must be >= 0");
  hidden_ = d / r;

  const auto ud = static_cast<std::size_t>(d), uh = static_cast<std::size_t>(hidden_);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> ctx_dist(0.0, cfg.context_init_sigma);
  std::vector<double> ctx(static_cast<std::size_t>(m) * ud);
  for (auto& v : ctx) v = cfg.context_init_sigma > 0.0 ? ctx_dist(rng) : 0.0;
  context_ = Tensor::matrix(static_cast<std::size_t>(m), ud, std::move(ctx), true);

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)), the usual linear-layer default.
  auto init = [&rng](std::size_t rows, std::size_t cols) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<double> w(rows * cols);
    for (auto& v : w) v = dist(rng);
    return Tensor::matrix(rows, cols, std::move(w), true);
  };
  metanet_in_ = init(uh, ud);
  metanet_out_ = init(ud, uh);
}

std::size_t PromptModel::parameter_count() const {
  return context_.numel() + metanet_in_.numel() + metanet_out_.numel();
}

Tensor PromptModel::metanet(const Tensor& feature) const {
  if (feature.shape() != numcore::Shape{static_cast<std::size_t>(feature_dim())}) {
    throw ShapeError("metanet: feature " + numcore::shape_to_string(feature.shape()) +
                     " does not match metanet input [" + std::to_string(feature_dim()) + "]");
  }
  return ops::matmul(metanet_out_, ops::relu(ops::matmul(metanet_in_, feature)));
}

PromptModel PromptModel::clone() const {
  PromptModel copy = *this;
  copy.context_ = context_.clone();
  copy.metanet_in_ = metanet_in_.clone();
  copy.metanet_out_ = metanet_out_.clone();
  return copy;
}

MetaToken meta_token_from_feature(const PromptModel& model, const Tensor& feature) {
  return {model.metanet(feature)};
}

MetaToken meta_token(const PromptModel& model, const ToyImage& img) {
  return meta_token_from_feature(model, model.encoders().encode_image(img));
}

DeltaMetaToken delta_from_features(const PromptModel& model, const Tensor& augmented_feature,
                                   std::span<const Tensor> reference_features, int class_id,
                                   Augmentation aug) {
  if (reference_features.empty()) throw ConfigError("delta_from_features: no reference features");
  auto augmented = model.metanet(augmented_feature);
  Tensor reference;
  if (reference_features.size() == 1) {
    reference = model.metanet(reference_features[0]);
  } else {
    std::vector<Tensor> tokens;
    tokens.reserve(reference_features.size());
    for (const auto& f : reference_features) tokens.push_back(model.metanet(f));
    reference = ops::mean_rows(ops::stack(tokens));
  }
  return {ops::sub(augmented, reference), class_id, aug};
}

DeltaMetaToken delta_meta_token(const PromptModel& model, const ToyImage& img, Augmentation aug,
                                std::uint64_t seed) {
  const auto& enc = model.encoders();
  auto augmented = enc.encode_image(toyworld::apply_augmentation(img, aug, seed));
  Tensor original = enc.encode_image(img);
  return delta_from_features(model, augmented, std::span<const Tensor>(&original, 1), img.class_id,
                             aug);
}

Tensor assemble_prompt(const PromptModel& model, const MetaToken& pi, int class_id) {
  const auto& enc = model.encoders();
  if (class_id < 0 || class_id >= enc.num_classes()) {
    throw ConfigError("assemble_prompt: class id " + std::to_string(class_id) + " out of range");
  }
  const auto m = static_cast<std::size_t>(model.context_length());
  const auto d = static_cast<std::size_t>(model.feature_dim());
  if (pi.value.shape() != numcore::Shape{d}) {
    throw ShapeError("assemble_prompt: meta token " + numcore::shape_to_string(pi.value.shape()) +
                     " does not match [" + std::to_string(d) + "]");
  }
  std::vector<Tensor> rows;
  rows.reserve(m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    rows.push_back(ops::add(ops::reshape(ops::slice(model.context(), i, i + 1), {d}), pi.value));
  }
  rows.push_back(enc.class_embedding(class_id));
  return ops::stack(rows);
}

Tensor class_logits(const PromptModel& model, const Tensor& image_feature,
                    std::span<const int> candidates, const MetaToken& pi) {
  if (candidates.empty()) throw ConfigError("class_logits: empty candidate set");
  const auto& enc = model.encoders();
  const double inv_tau = 1.0 / enc.temperature();
  std::vector<Tensor> logits;
  logits.reserve(candidates.size());
  for (int y : candidates) {
    auto text = enc.encode_text(assemble_prompt(model, pi, y));
    logits.push_back(ops::scale(ops::cosine_similarity(image_feature, text), inv_tau));
  }
  return ops::stack(logits);
}

Tensor predict_probs(const PromptModel& model, const ToyImage& img,
                     std::span<const int> candidates, const MetaToken& pi) {
  auto feature = model.encoders().encode_image(img);
  return ops::softmax(class_logits(model, feature, candidates, pi));
}

}  // namespace aapl::promptcore
