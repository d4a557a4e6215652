#include "aapl/profiling/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "aapl/error.hpp"

namespace aapl::profiling {

SamplerWeights uniform_sampler(int epoch_index) {
  SamplerWeights w;
  w.probs = toyworld::uniform_augmentation_probs();
  w.epoch_index = epoch_index;
  return w;
}

SamplerWeights wrs_weights(const SilhouetteReport& report, double temperature, bool standardize,
                           int epoch_index) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("wrs_weights: temperature must be finite and > 0");
  }
  if (!std::isfinite(report.overall)) throw NumericError("wrs_weights: non-finite overall score");
  SamplerWeights out;
  out.temperature = temperature;
  out.epoch_index = epoch_index;

  std::array<double, kNumAugmentations> scores{};
  for (std::size_t t = 0; t < kNumAugmentations; ++t) {
    if (report.per_type[t]) {
      if (!std::isfinite(*report.per_type[t])) throw NumericError("wrs_weights: non-finite score");
      scores[t] = *report.per_type[t];
    } else {
      scores[t] = report.overall;
      out.imputed.push_back(toyworld::kAllAugmentations[t]);
    }
  }
  if (standardize) {
    const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / kNumAugmentations;
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    const double sd = std::sqrt(var / kNumAugmentations);
    for (auto& s : scores) s = sd > 0.0 ? (s - mean) / sd : 0.0;
  }

  std::array<double, kNumAugmentations> logits{};
  for (std::size_t t = 0; t < kNumAugmentations; ++t) logits[t] = -scores[t] / temperature;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t t = 0; t < kNumAugmentations; ++t) {
    out.probs[t] = std::exp(logits[t] - mx);
    z += out.probs[t];
  }
  for (auto& p : out.probs) p /= z;
  return out;
}

std::pair<Augmentation, Augmentation> wrs_sample(const SamplerWeights& weights, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return toyworld::draw_augmentation_pair(weights.probs, rng);
}

std::array<double, kNumAugmentations> pair_inclusion_probabilities(
    const toyworld::AugmentationProbs& probs) {
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  std::array<double, kNumAugmentations> p{};
  for (std::size_t t = 0; t < kNumAugmentations; ++t) p[t] = probs[t] / total;
  std::array<double, kNumAugmentations> out{};
  for (std::size_t t = 0; t < kNumAugmentations; ++t) {
    double second = 0.0;
    for (std::size_t u = 0; u < kNumAugmentations; ++u) {
      if (u != t && p[u] < 1.0) second += p[u] * p[t] / (1.0 - p[u]);
    }
    out[t] = p[t] + second;
  }
  return out;
}

std::vector<Augmentation> rank_augmentations(const SilhouetteReport& report) {
  std::vector<std::size_t> idx(kNumAugmentations);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = report.per_type[a];
    const auto& sb = report.per_type[b];
    if (sa && sb) return *sa > *sb;
    return sa.has_value() && !sb.has_value();
  });
  std::vector<Augmentation> out;
  for (auto i : idx) out.push_back(toyworld::kAllAugmentations[i]);
  return out;
}

}  // namespace aapl::profiling
