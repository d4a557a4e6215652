#pragma once

#include <cstddef>
#include <vector>

namespace aapl::toyworld {

/// Small RGB raster, H x W x 3 row-major, values in [0,1].
struct ToyImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;
  int class_id = 0;

  ToyImage() = default;
  ToyImage(std::size_t h, std::size_t w, int label, double fill = 0.0)
      : height(h), width(w), pixels(h * w * 3, fill), class_id(label) {}

  double& at(std::size_t y, std::size_t x, std::size_t c) { return pixels[(y * width + x) * 3 + c]; }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels[(y * width + x) * 3 + c];
  }

  void clamp();
  bool operator==(const ToyImage&) const = default;
};

struct Rgb {
  double r, g, b;
};
struct Hsv {
  double h, s, v;  // h in [0,1)
};

Hsv rgb_to_hsv(Rgb c);
Rgb hsv_to_rgb(Hsv c);
double luminance(Rgb c);

}  // namespace aapl::toyworld
