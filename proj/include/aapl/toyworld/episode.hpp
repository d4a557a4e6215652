#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>

#include "aapl/toyworld/augment.hpp"
#include "aapl/toyworld/dataset.hpp"

namespace aapl::toyworld {

using AugmentationProbs = std::array<double, kNumAugmentations>;

AugmentationProbs uniform_augmentation_probs();

/// Draws two distinct augmentation types: the first from `probs`, the second
/// from `probs` renormalized with the first removed.
/// Throws ConfigError when fewer than two types carry positive mass.
std::pair<Augmentation, Augmentation> draw_augmentation_pair(const AugmentationProbs& probs,
                                                             std::mt19937_64& rng);

struct Episode {
  const ToyImage* x1 = nullptr;
  const ToyImage* x2 = nullptr;
  int class1 = 0;
  int class2 = 0;
  Augmentation aug_a = Augmentation::kHFlip;
  Augmentation aug_b = Augmentation::kVFlip;
  std::uint64_t aug_seed = 0;  // base seed for the stochastic augmentations of this episode
};

struct AnchorRef {
  int class_id;
  std::size_t index;  // into the class's train partition
};

/// Two distinct base classes and two distinct augmentations, images from the
/// train partition. With an anchor, x1 is fixed and only x2 is drawn.
Episode sample_episode(const ToyDataset& ds, const AugmentationProbs& probs, std::uint64_t seed,
                       std::optional<AnchorRef> anchor = std::nullopt);

}  // namespace aapl::toyworld
