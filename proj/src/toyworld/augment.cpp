#include "aapl/toyworld/augment.hpp"

#include <cmath>
#include <random>
#include <string>

#include "aapl/error.hpp"

namespace aapl::toyworld {

namespace {

constexpr std::array<std::string_view, kNumAugmentations> kNames = {
    "hflip",      "vflip",    "rot90",     "rot180",    "rot270",
    "crop_resize", "brightness", "contrast", "saturation", "hue",
    "grayscale",  "gaussian_blur", "gaussian_noise", "cutout",
};

ToyImage remap(const ToyImage& img, auto&& source_of) {
  ToyImage out(img.height, img.width, img.class_id);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      auto [sy, sx] = source_of(y, x);
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = img.at(sy, sx, c);
    }
  }
  return out;
}

void require_square(const ToyImage& img, Augmentation aug) {
  if (img.height != img.width) {
    throw ShapeError("apply_augmentation: " + std::string(augmentation_name(aug)) +
                     " needs a square image");
  }
}

ToyImage per_pixel(const ToyImage& img, auto&& fn) {
  ToyImage out = img;
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    Rgb c = fn(Rgb{img.pixels[i], img.pixels[i + 1], img.pixels[i + 2]});
    out.pixels[i] = c.r;
    out.pixels[i + 1] = c.g;
    out.pixels[i + 2] = c.b;
  }
  return out;
}

double sample_bilinear(const ToyImage& img, double y, double x, std::size_t c) {
  const double maxy = static_cast<double>(img.height - 1), maxx = static_cast<double>(img.width - 1);
  y = std::clamp(y, 0.0, maxy);
  x = std::clamp(x, 0.0, maxx);
  const auto y0 = static_cast<std::size_t>(std::floor(y));
  const auto x0 = static_cast<std::size_t>(std::floor(x));
  const std::size_t y1 = std::min(y0 + 1, img.height - 1), x1 = std::min(x0 + 1, img.width - 1);
  const double fy = y - static_cast<double>(y0), fx = x - static_cast<double>(x0);
  const double top = (1 - fx) * img.at(y0, x0, c) + fx * img.at(y0, x1, c);
  const double bot = (1 - fx) * img.at(y1, x0, c) + fx * img.at(y1, x1, c);
  return (1 - fy) * top + fy * bot;
}

ToyImage crop_resize(const ToyImage& img, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> scale_dist(aug_params::kCropMinScale,
                                                    aug_params::kCropMaxScale);
  const double s = scale_dist(rng);
  const double ch = s * static_cast<double>(img.height), cw = s * static_cast<double>(img.width);
  std::uniform_real_distribution<double> oy_dist(0.0, static_cast<double>(img.height) - ch);
  std::uniform_real_distribution<double> ox_dist(0.0, static_cast<double>(img.width) - cw);
  const double oy = oy_dist(rng), ox = ox_dist(rng);
  ToyImage out(img.height, img.width, img.class_id);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      const double sy = oy + (static_cast<double>(y) + 0.5) * ch / static_cast<double>(img.height) - 0.5;
      const double sx = ox + (static_cast<double>(x) + 0.5) * cw / static_cast<double>(img.width) - 0.5;
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = sample_bilinear(img, sy, sx, c);
    }
  }
  return out;
}

ToyImage gaussian_blur(const ToyImage& img) {
  constexpr int kRadius = 2;
  std::array<double, 2 * kRadius + 1> kernel{};
  double total = 0.0;
  for (int i = -kRadius; i <= kRadius; ++i) {
    kernel[i + kRadius] = std::exp(-0.5 * i * i / (aug_params::kBlurSigma * aug_params::kBlurSigma));
    total += kernel[i + kRadius];
  }
  for (auto& k : kernel) k /= total;

  const auto h = static_cast<int>(img.height), w = static_cast<int>(img.width);
  auto clampi = [](int v, int hi) { return std::clamp(v, 0, hi - 1); };
  ToyImage tmp(img.height, img.width, img.class_id);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int k = -kRadius; k <= kRadius; ++k) acc += kernel[k + kRadius] * img.at(y, clampi(x + k, w), c);
        tmp.at(y, x, c) = acc;
      }
    }
  }
  ToyImage out(img.height, img.width, img.class_id);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int k = -kRadius; k <= kRadius; ++k) acc += kernel[k + kRadius] * tmp.at(clampi(y + k, h), x, c);
        out.at(y, x, c) = acc;
      }
    }
  }
  return out;
}

}  // namespace

std::string_view augmentation_name(Augmentation a) { return kNames[index_of(a)]; }

std::optional<Augmentation> parse_augmentation(std::string_view name) {
  for (std::size_t i = 0; i < kNumAugmentations; ++i) {
    if (kNames[i] == name) return kAllAugmentations[i];
  }
  return std::nullopt;
}

bool is_stochastic(Augmentation a) {
  return a == Augmentation::kCropResize || a == Augmentation::kGaussianNoise ||
         a == Augmentation::kCutout;
}

ToyImage apply_augmentation(const ToyImage& img, Augmentation aug, std::uint64_t seed) {
  if (img.pixels.size() != img.height * img.width * 3 || img.height == 0) {
    throw ShapeError("apply_augmentation: malformed image");
  }
  const std::size_t last_y = img.height - 1, last_x = img.width - 1;
  std::mt19937_64 rng(seed);
  ToyImage out;
  switch (aug) {
    case Augmentation::kHFlip:
      out = remap(img, [&](std::size_t y, std::size_t x) { return std::pair{y, last_x - x}; });
      break;
    case Augmentation::kVFlip:
      out = remap(img, [&](std::size_t y, std::size_t x) { return std::pair{last_y - y, x}; });
      break;
    case Augmentation::kRot90:  // counter-clockwise
      require_square(img, aug);
      out = remap(img, [&](std::size_t y, std::size_t x) { return std::pair{x, last_x - y}; });
      break;
    case Augmentation::kRot180:
      out = remap(img, [&](std::size_t y, std::size_t x) { return std::pair{last_y - y, last_x - x}; });
      break;
    case Augmentation::kRot270:
      require_square(img, aug);
      out = remap(img, [&](std::size_t y, std::size_t x) { return std::pair{last_y - x, y}; });
      break;
    case Augmentation::kCropResize:
      out = crop_resize(img, rng);
      break;
    case Augmentation::kBrightness:
      out = per_pixel(img, [](Rgb c) {
        const double f = aug_params::kBrightnessFactor;
        return Rgb{c.r * f, c.g * f, c.b * f};
      });
      break;
    case Augmentation::kContrast: {
      double mean = 0.0;
      for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
        mean += luminance({img.pixels[i], img.pixels[i + 1], img.pixels[i + 2]});
      }
      mean /= static_cast<double>(img.height * img.width);
      out = per_pixel(img, [mean](Rgb c) {
        const double f = aug_params::kContrastFactor;
        return Rgb{(c.r - mean) * f + mean, (c.g - mean) * f + mean, (c.b - mean) * f + mean};
      });
      break;
    }
    case Augmentation::kSaturation:
      out = per_pixel(img, [](Rgb c) {
        Hsv h = rgb_to_hsv(c);
        h.s = std::min(1.0, h.s * aug_params::kSaturationFactor);
        return hsv_to_rgb(h);
      });
      break;
    case Augmentation::kHue:
      out = per_pixel(img, [](Rgb c) {
        Hsv h = rgb_to_hsv(c);
        h.h += aug_params::kHueShift;
        return hsv_to_rgb(h);
      });
      break;
    case Augmentation::kGrayscale:
      out = per_pixel(img, [](Rgb c) {
        const double l = luminance(c);
        return Rgb{l, l, l};
      });
      break;
    case Augmentation::kGaussianBlur:
      out = gaussian_blur(img);
      break;
    case Augmentation::kGaussianNoise: {
      std::normal_distribution<double> noise(0.0, aug_params::kNoiseSigma);
      out = img;
      for (auto& v : out.pixels) v += noise(rng);
      break;
    }
    case Augmentation::kCutout: {
      const std::size_t size = std::min({aug_params::kCutoutSize, img.height, img.width});
      std::uniform_int_distribution<std::size_t> ry(0, img.height - size), rx(0, img.width - size);
      const std::size_t y0 = ry(rng), x0 = rx(rng);
      out = img;
      for (std::size_t y = y0; y < y0 + size; ++y) {
        for (std::size_t x = x0; x < x0 + size; ++x) {
          for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = 0.0;
        }
      }
      break;
    }
  }
  out.class_id = img.class_id;
  out.clamp();
  return out;
}

}  // namespace aapl::toyworld
