#include "aapl/toyworld/episode.hpp"

#include <cmath>
#include <string>

#include "aapl/error.hpp"

namespace aapl::toyworld {

namespace {

std::size_t draw_index(const AugmentationProbs& w, std::optional<std::size_t> excluded,
                       std::mt19937_64& rng) {
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i != excluded) total += w[i];
  }
  std::uniform_real_distribution<double> u(0.0, total);
  const double r = u(rng);
  double cum = 0.0;
  std::size_t last = w.size();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i == excluded || w[i] <= 0.0) continue;
    cum += w[i];
    last = i;
    if (r < cum) return i;
  }
  return last;  // r landed on the upper edge through rounding
}

}  // namespace

AugmentationProbs uniform_augmentation_probs() {
  AugmentationProbs p;
  p.fill(1.0 / static_cast<double>(kNumAugmentations));
  return p;
}

std::pair<Augmentation, Augmentation> draw_augmentation_pair(const AugmentationProbs& probs,
                                                             std::mt19937_64& rng) {
  int positive = 0;
  for (double w : probs) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("augmentation weights must be finite and >= 0");
    if (w > 0.0) ++positive;
  }
  if (positive < 2) {
    throw ConfigError("cannot draw two distinct augmentation types: fewer than two carry mass");
  }
  const std::size_t first = draw_index(probs, std::nullopt, rng);
  const std::size_t second = draw_index(probs, first, rng);
  return {kAllAugmentations[first], kAllAugmentations[second]};
}

Episode sample_episode(const ToyDataset& ds, const AugmentationProbs& probs, std::uint64_t seed,
                       std::optional<AnchorRef> anchor) {
  const auto base = ds.base_classes();
  if (base.size() < 2) throw ConfigError("sample_episode: need at least two base classes");
  for (int c : base) {
    if (ds.images(c, Partition::kTrain).empty()) {
      throw ConfigError("sample_episode: empty train partition for class " + std::to_string(c));
    }
  }
  std::mt19937_64 rng(seed);
  Episode ep;
  if (anchor) {
    if (!ds.is_base(anchor->class_id)) throw ConfigError("sample_episode: anchor is not a base class");
    auto imgs = ds.images(anchor->class_id, Partition::kTrain);
    if (anchor->index >= imgs.size()) throw ConfigError("sample_episode: anchor index out of range");
    ep.class1 = anchor->class_id;
    ep.x1 = &imgs[anchor->index];
  } else {
    std::uniform_int_distribution<std::size_t> pick_class(0, base.size() - 1);
    ep.class1 = base[pick_class(rng)];
    auto imgs = ds.images(ep.class1, Partition::kTrain);
    std::uniform_int_distribution<std::size_t> pick_img(0, imgs.size() - 1);
    ep.x1 = &imgs[pick_img(rng)];
  }
  {
    std::uniform_int_distribution<std::size_t> pick_other(0, base.size() - 2);
    std::size_t slot = pick_other(rng);
    // Skip over class1's position so class2 != class1.
    std::size_t pos1 = 0;
    while (base[pos1] != ep.class1) ++pos1;
    if (slot >= pos1) ++slot;
    ep.class2 = base[slot];
    auto imgs = ds.images(ep.class2, Partition::kTrain);
    std::uniform_int_distribution<std::size_t> pick_img(0, imgs.size() - 1);
    ep.x2 = &imgs[pick_img(rng)];
  }
  std::tie(ep.aug_a, ep.aug_b) = draw_augmentation_pair(probs, rng);
  ep.aug_seed = rng();
  return ep;
}

}  // namespace aapl::toyworld
