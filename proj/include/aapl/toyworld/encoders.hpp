#pragma once

#include <cstdint>
#include <vector>

#include "aapl/numcore/tensor.hpp"
#include "aapl/toyworld/image.hpp"

namespace aapl::toyworld {

using numcore::Tensor;

struct EncoderConfig {
  int feature_dim = 32;
  int context_length = 4;
  int text_hidden = 64;
  int image_size = 16;
  int num_classes = 8;
  double temperature = 0.07;
  // Weight of the image-text alignment fit; 0 leaves the image map purely random.
  double alignment = 1.0;
  int alignment_samples_per_class = 24;
  std::uint64_t seed = 0;
};

/// Frozen stand-ins for the image and text towers of a contrastive
/// image-text model, plus one fixed unit-norm embedding per class.
///
/// Image tower: tanh(W x + b) over flattened pixels. W is a fixed random map
/// plus a ridge-fitted term that points rendered class samples (all K classes,
/// drawn from the encoder's own seed stream, never from a dataset) at the text
/// feature of their zero-context prompt. This plays the role of large-scale
/// pretraining: new classes are zero-shot recognizable before prompt tuning.
///
/// Text tower: B tanh(A mean_rows(t) + a) + b over an (M+1) x d token
/// sequence. Mean pooling makes the output independent of token order.
///
/// No weight here ever requires grad; gradients flow through encode_text to
/// its input only.
class FrozenEncoders {
 public:
  explicit FrozenEncoders(const EncoderConfig& cfg);

  Tensor encode_image(const ToyImage& img) const;
  Tensor encode_text(const Tensor& prompt) const;
  const Tensor& class_embedding(int class_id) const;

  int feature_dim() const { return cfg_.feature_dim; }
  int context_length() const { return cfg_.context_length; }
  int num_classes() const { return cfg_.num_classes; }
  int image_size() const { return cfg_.image_size; }
  double temperature() const { return cfg_.temperature; }
  void set_temperature(double tau);
  const EncoderConfig& config() const { return cfg_; }

  // Every frozen value, concatenated; used to prove nothing moved.
  std::vector<double> weight_snapshot() const;

 private:
  EncoderConfig cfg_;
  Tensor image_weight_;  // [d, H*W*3]
  Tensor image_bias_;    // [d]
  Tensor text_in_;       // [h, d]
  Tensor text_in_bias_;  // [h]
  Tensor text_out_;      // [d, h]
  Tensor text_out_bias_; // [d]
  std::vector<Tensor> class_embeddings_;
};

}  // namespace aapl::toyworld
