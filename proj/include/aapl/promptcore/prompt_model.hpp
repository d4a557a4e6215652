#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aapl/numcore/tensor.hpp"
#include "aapl/toyworld/augment.hpp"
#include "aapl/toyworld/encoders.hpp"

namespace aapl::promptcore {

using numcore::Tensor;
using toyworld::Augmentation;
using toyworld::FrozenEncoders;
using toyworld::ToyImage;

// How a delta meta token removes the un-augmented part.
enum class DeltaVariant {
  kSameImage,  // h(f(Aug(x))) - h(f(x))
  kClassMean,  // h(f(Aug(x))) - mean_j h(f(x_j)) over reference images of x's class
};

struct PromptConfig {
  int bottleneck_ratio = 0;  // 0 picks 16 when d >= 32, else 4
  double context_init_sigma = 0.02;
  std::uint64_t seed = 0;
};

int default_bottleneck_ratio(int feature_dim);

/// Learnable context vectors v_1..v_M plus a bias-free bottleneck metanet
/// d -> d/r -> d with a ReLU in between. Holds a non-owning reference to the
/// frozen encoders, which must outlive the model.
class PromptModel {
 public:
  PromptModel(const FrozenEncoders& encoders, const PromptConfig& cfg);

  const FrozenEncoders& encoders() const { return *encoders_; }
  int feature_dim() const { return encoders_->feature_dim(); }
  int context_length() const { return encoders_->context_length(); }
  int hidden_dim() const { return hidden_; }

  const Tensor& context() const { return context_; }          // [M, d]
  const Tensor& metanet_in() const { return metanet_in_; }    // [d/r, d]
  const Tensor& metanet_out() const { return metanet_out_; }  // [d, d/r]

  // Handles share storage with the model; the optimizer updates through them.
  std::vector<Tensor> parameters() const { return {context_, metanet_in_, metanet_out_}; }
  std::size_t parameter_count() const;

  // h(feature); differentiable w.r.t. the metanet weights and the feature.
  Tensor metanet(const Tensor& feature) const;

  PromptModel clone() const;  // deep copy of the parameters, same encoders

 private:
  const FrozenEncoders* encoders_;
  int hidden_;
  Tensor context_;
  Tensor metanet_in_;
  Tensor metanet_out_;
};

struct MetaToken {
  Tensor value;  // [d]
};

struct DeltaMetaToken {
  Tensor value;  // [d]
  int class_id = 0;
  Augmentation augmentation = Augmentation::kHFlip;
};

MetaToken meta_token(const PromptModel& model, const ToyImage& img);
MetaToken meta_token_from_feature(const PromptModel& model, const Tensor& feature);

// Same-image delta: h(f(Aug(x))) - h(f(x)).
DeltaMetaToken delta_meta_token(const PromptModel& model, const ToyImage& img, Augmentation aug,
                                std::uint64_t seed);

// Delta from precomputed features. With one reference feature this is the
// same-image delta; with several it subtracts their mean meta token.
DeltaMetaToken delta_from_features(const PromptModel& model, const Tensor& augmented_feature,
                                   std::span<const Tensor> reference_features, int class_id,
                                   Augmentation aug);

// Rows 0..M-1 are v_m + pi, row M is the (gradient-free) class embedding.
Tensor assemble_prompt(const PromptModel& model, const MetaToken& pi, int class_id);

// cos(f(x), g(t_y(x))) / tau for each candidate y, in candidate order.
Tensor class_logits(const PromptModel& model, const Tensor& image_feature,
                    std::span<const int> candidates, const MetaToken& pi);

Tensor predict_probs(const PromptModel& model, const ToyImage& img,
                     std::span<const int> candidates, const MetaToken& pi);

}  // namespace aapl::promptcore
