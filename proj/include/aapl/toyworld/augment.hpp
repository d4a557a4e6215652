#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "aapl/toyworld/image.hpp"

namespace aapl::toyworld {

// SimCLR-style transform family. Every member has one fixed parameterization;
// CropResize, GaussianNoise and Cutout draw their randomness from the seed.
enum class Augmentation : std::uint8_t {
  kHFlip,
  kVFlip,
  kRot90,
  kRot180,
  kRot270,
  kCropResize,
  kBrightness,
  kContrast,
  kSaturation,
  kHue,
  kGrayscale,
  kGaussianBlur,
  kGaussianNoise,
  kCutout,
};

inline constexpr std::size_t kNumAugmentations = 14;

inline constexpr std::array<Augmentation, kNumAugmentations> kAllAugmentations = {
    Augmentation::kHFlip,        Augmentation::kVFlip,         Augmentation::kRot90,
    Augmentation::kRot180,       Augmentation::kRot270,        Augmentation::kCropResize,
    Augmentation::kBrightness,   Augmentation::kContrast,      Augmentation::kSaturation,
    Augmentation::kHue,          Augmentation::kGrayscale,     Augmentation::kGaussianBlur,
    Augmentation::kGaussianNoise, Augmentation::kCutout,
};

namespace aug_params {
inline constexpr double kBrightnessFactor = 1.35;
inline constexpr double kContrastFactor = 1.5;
inline constexpr double kSaturationFactor = 1.5;
inline constexpr double kHueShift = 0.25;
inline constexpr double kBlurSigma = 1.0;
inline constexpr double kNoiseSigma = 0.1;
inline constexpr double kCropMinScale = 0.6;
inline constexpr double kCropMaxScale = 0.85;
inline constexpr std::size_t kCutoutSize = 6;
}  // namespace aug_params

constexpr std::size_t index_of(Augmentation a) { return static_cast<std::size_t>(a); }
std::string_view augmentation_name(Augmentation a);
std::optional<Augmentation> parse_augmentation(std::string_view name);
bool is_stochastic(Augmentation a);

// Pure given (img, aug, seed). Preserves shape and class_id; output clamped to [0,1].
ToyImage apply_augmentation(const ToyImage& img, Augmentation aug, std::uint64_t seed);

}  // namespace aapl::toyworld
