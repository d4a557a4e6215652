#include "aapl/toyworld/image.hpp"

#include <algorithm>
#include <cmath>

namespace aapl::toyworld {

void ToyImage::clamp() {
  for (auto& v : pixels) v = std::clamp(v, 0.0, 1.0);
}

Hsv rgb_to_hsv(Rgb c) {
  const double mx = std::max({c.r, c.g, c.b});
  const double mn = std::min({c.r, c.g, c.b});
  const double delta = mx - mn;
  Hsv out{0.0, mx > 0.0 ? delta / mx : 0.0, mx};
  if (delta > 0.0) {
    double h = 0.0;
    if (mx == c.r) {
      h = (c.g - c.b) / delta;
    } else if (mx == c.g) {
      h = 2.0 + (c.b - c.r) / delta;
    } else {
      h = 4.0 + (c.r - c.g) / delta;
    }
    h /= 6.0;
    if (h < 0.0) h += 1.0;
    out.h = h;
  }
  return out;
}

Rgb hsv_to_rgb(Hsv c) {
  double h = c.h - std::floor(c.h);
  const double s = std::clamp(c.s, 0.0, 1.0);
  const double v = c.v;
  const double sector = h * 6.0;
  const int i = static_cast<int>(std::floor(sector)) % 6;
  const double f = sector - std::floor(sector);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (i) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

double luminance(Rgb c) { return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b; }

}  // namespace aapl::toyworld
