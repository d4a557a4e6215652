#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "aapl/toyworld/augment.hpp"
#include "aapl/toyworld/episode.hpp"

namespace aapl::profiling {

using toyworld::Augmentation;
using toyworld::kNumAugmentations;

struct SilhouetteReport {
  // Mean silhouette of the delta tokens of each augmentation type; empty when
  // the type had no samples.
  std::array<std::optional<double>, kNumAugmentations> per_type{};
  std::array<std::size_t, kNumAugmentations> sample_count{};
  double overall = 0.0;
};

struct SamplerWeights {
  toyworld::AugmentationProbs probs{};
  double temperature = 1.0;
  int epoch_index = 0;
  std::vector<Augmentation> imputed;  // types whose score was filled in with the overall mean
};

SamplerWeights uniform_sampler(int epoch_index = 0);

/// weight_t = softmax(-score_t / temperature): poorly separated augmentation
/// types are drawn more often. Missing types take the overall mean. With
/// `standardize`, scores are z-scored across types before inversion.
SamplerWeights wrs_weights(const SilhouetteReport& report, double temperature = 1.0,
                           bool standardize = false, int epoch_index = 0);

// Two distinct types; the second from the weights renormalized without the first.
std::pair<Augmentation, Augmentation> wrs_sample(const SamplerWeights& weights, std::uint64_t seed);

// Probability that type t appears in a drawn pair (either slot).
std::array<double, kNumAugmentations> pair_inclusion_probabilities(
    const toyworld::AugmentationProbs& probs);

// Types ordered by descending silhouette (missing types last).
std::vector<Augmentation> rank_augmentations(const SilhouetteReport& report);

}  // namespace aapl::profiling
