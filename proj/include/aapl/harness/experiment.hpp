#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "aapl/harness/config.hpp"
#include "aapl/profiling/profile.hpp"
#include "aapl/profiling/sampler.hpp"
#include "aapl/promptcore/prompt_model.hpp"
#include "aapl/toyworld/dataset.hpp"
#include "aapl/toyworld/encoders.hpp"

namespace aapl::harness {

/// Dataset plus frozen encoders, both derived from the config's master seed.
struct World {
  toyworld::ToyDataset dataset;
  std::unique_ptr<toyworld::FrozenEncoders> encoders;
};

World build_world(const ExperimentConfig& cfg);
promptcore::PromptModel init_model(const ExperimentConfig& cfg, const World& world);

enum class Split { kBase, kNew };
std::string_view split_name(Split s);

// Fraction correct on the test partition of the split's classes. The meta
// token comes from the un-augmented image; candidates are the split's classes.
double evaluate(const promptcore::PromptModel& model, const toyworld::ToyDataset& ds, Split split);

// Fraction of `images` whose argmax over `candidates` equals their class id.
double accuracy(const promptcore::PromptModel& model, std::span<const toyworld::ToyImage> images,
                std::span<const int> candidates);

struct HarmonicMean {
  double value = 0.0;
  bool degenerate = false;  // both inputs zero
};
// 2ab/(a+b) for accuracies in percent; (0,0) gives 0 and sets `degenerate`.
HarmonicMean harmonic_mean(double base_acc, double new_acc);

struct EpochMetrics {
  int epoch = 0;
  std::size_t episodes = 0;
  // Mean over the epoch's episodes; absent for epoch 0 (before training).
  std::optional<double> total_loss, ce_loss, adtriplet_loss;
  profiling::SilhouetteReport silhouette;
  toyworld::AugmentationProbs sampler_probs{};  // weights used to draw this epoch's pairs
  double base_acc = 0.0;  // percent
  double new_acc = 0.0;   // percent
  double hm = 0.0;
};

struct RunMetrics {
  std::uint64_t seed = 0;
  std::vector<EpochMetrics> epochs;  // epoch 0 is the untrained model
  double base_acc = 0.0;
  double new_acc = 0.0;
  double hm = 0.0;
  double wall_seconds = 0.0;
  std::size_t new_class_train_accesses = 0;  // must stay 0
  std::size_t ce_clamp_warnings = 0;
};

struct EpisodeTrace {
  int epoch;
  std::size_t episode;
  int class1, class2;
  toyworld::Augmentation aug_a, aug_b;
  double total, ce, adtriplet;
};

struct TrainOptions {
  std::function<void(const EpisodeTrace&)> on_episode;
  // Evaluate accuracy after every epoch; the last epoch is always evaluated.
  bool eval_every_epoch = true;
};

struct TrainResult {
  promptcore::PromptModel model;
  RunMetrics metrics;
};

/// One run: E epochs of one episode per base-class train image, profiling
/// after every epoch. Returns the last-epoch model. Throws NumericError naming
/// the epoch and episode if a loss becomes non-finite.
TrainResult train(const ExperimentConfig& cfg, const World& world, const TrainOptions& opts = {});

profiling::ProfileConfig profile_config(const ExperimentConfig& cfg, int epoch);

}  // namespace aapl::harness
