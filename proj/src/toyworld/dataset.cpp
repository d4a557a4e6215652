#include "aapl/toyworld/dataset.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "aapl/error.hpp"

namespace aapl::toyworld {

namespace {

constexpr char kMagic[8] = {'A', 'A', 'P', 'L', 'D', 'S', '1', '\0'};
constexpr double kBackground = 0.1;
constexpr double kPixelNoise = 0.02;
constexpr int kJitter = 2;
constexpr double kBackdropX = 0.6;
constexpr double kBackdropY = 0.3;
constexpr Rgb kBackdropTint{0.6, 0.8, 1.0};

bool inside(ShapeTemplate t, double dx, double dy) {
  const double ax = std::abs(dx), ay = std::abs(dy);
  switch (t) {
    case ShapeTemplate::kSquare:
      return ax <= 4.0 && ay <= 4.0;
    case ShapeTemplate::kDisc:
      return dx * dx + dy * dy <= 20.0;
    case ShapeTemplate::kCross:
      return (ax <= 1.0 && ay <= 5.0) || (ay <= 1.0 && ax <= 5.0);
    case ShapeTemplate::kDiagonalStripe:
      return std::abs(dx - dy) <= 1.5 && ax <= 5.0 && ay <= 5.0;
    case ShapeTemplate::kRing: {
      const double r2 = dx * dx + dy * dy;
      return r2 >= 6.0 && r2 <= 25.0;
    }
    case ShapeTemplate::kChecker: {
      if (ax > 4.5 || ay > 4.5) return false;
      const auto cx = static_cast<int>(std::floor((dx + 4.5) / 3.0));
      const auto cy = static_cast<int>(std::floor((dy + 4.5) / 3.0));
      return (cx + cy) % 2 == 0;
    }
    case ShapeTemplate::kTriangle:  // apex up
      return dy >= -4.5 && dy <= 4.5 && ax <= (dy + 4.5) * 0.55;
    case ShapeTemplate::kBar:  // thick bar sitting low
      return ax <= 5.5 && dy >= 1.0 && dy <= 4.0;
  }
  return false;
}

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffu);
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw ConfigError("dataset file: truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw ConfigError("dataset file: truncated");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace

ShapeTemplate class_template(int class_id) {
  return static_cast<ShapeTemplate>(class_id % static_cast<int>(kNumTemplates));
}

double class_hue(int class_id) {
  return static_cast<double>((5 * class_id) % static_cast<int>(kNumHues)) /
         static_cast<double>(kNumHues);
}

ToyImage render_class_image(int class_id, int image_size, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(image_size);
  ToyImage img(n, n, class_id, kBackground);
  // Shared backdrop: a tinted ramp lit from one corner, with no mirror or
  // rotation symmetry, so geometric and colour augmentations move it the same
  // way in every image.
  const double span = image_size > 1 ? image_size - 1.0 : 1.0;
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const double ramp = kBackdropX * (static_cast<double>(x) / span) +
                          kBackdropY * (static_cast<double>(y) / span);
      img.at(y, x, 0) = kBackground + ramp * kBackdropTint.r;
      img.at(y, x, 1) = kBackground + ramp * kBackdropTint.g;
      img.at(y, x, 2) = kBackground + ramp * kBackdropTint.b;
    }
  }
  std::uniform_int_distribution<int> jitter(-kJitter, kJitter);
  const double center = (image_size - 1) / 2.0;
  const double cy = center + jitter(rng), cx = center + jitter(rng);
  const double s = image_size / 16.0;  // templates are laid out on a 16 px grid
  const Rgb color = hsv_to_rgb({class_hue(class_id), 0.85, 0.9});
  const ShapeTemplate t = class_template(class_id);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      if (inside(t, (static_cast<double>(x) - cx) / s, (static_cast<double>(y) - cy) / s)) {
        img.at(y, x, 0) = color.r;
        img.at(y, x, 1) = color.g;
        img.at(y, x, 2) = color.b;
      }
    }
  }
  std::normal_distribution<double> noise(0.0, kPixelNoise);
  for (auto& v : img.pixels) v += noise(rng);
  img.clamp();
  return img;
}

ToyDataset::ToyDataset(int num_classes, int image_size, std::vector<std::vector<ToyImage>> train,
                       std::vector<std::vector<ToyImage>> val,
                       std::vector<std::vector<ToyImage>> test)
    : num_classes_(num_classes),
      image_size_(image_size),
      train_(std::move(train)),
      val_(std::move(val)),
      test_(std::move(test)) {
  const auto k = static_cast<std::size_t>(num_classes);
  if (train_.size() != k || val_.size() != k || test_.size() != k) {
    throw ConfigError("dataset: partition tables do not cover every class");
  }
}

std::vector<int> ToyDataset::base_classes() const {
  std::vector<int> out;
  for (int c = 0; c < num_base(); ++c) out.push_back(c);
  return out;
}

std::vector<int> ToyDataset::new_classes() const {
  std::vector<int> out;
  for (int c = num_base(); c < num_classes_; ++c) out.push_back(c);
  return out;
}

std::span<const ToyImage> ToyDataset::images(int class_id, Partition part) const {
  if (class_id < 0 || class_id >= num_classes_) {
    throw ConfigError("dataset: class id " + std::to_string(class_id) + " out of range");
  }
  const auto c = static_cast<std::size_t>(class_id);
  switch (part) {
    case Partition::kTrain: return train_[c];
    case Partition::kVal: return val_[c];
    case Partition::kTest: return test_[c];
  }
  return {};
}

ToyDataset generate_dataset(const DatasetConfig& cfg) {
  if (cfg.num_classes < 4 || cfg.num_classes % 2 != 0) {
    throw ConfigError("generate_dataset: K must be even and >= 4");
  }
  if (cfg.num_classes > kMaxClasses) {
    throw ConfigError("generate_dataset: K=" + std::to_string(cfg.num_classes) +
                      " exceeds the " + std::to_string(kMaxClasses) +
                      " available template x hue combinations");
  }
  if (cfg.per_class_count < 24) throw ConfigError("generate_dataset: per_class_count must be >= 24");
  if (cfg.image_size < 8) throw ConfigError("generate_dataset: image_size must be >= 8");
  if (cfg.shots < 1 || cfg.per_class_count - cfg.shots < 2) {
    throw ConfigError("generate_dataset: shots must leave at least one val and one test image");
  }

  const auto k = static_cast<std::size_t>(cfg.num_classes);
  std::vector<std::vector<ToyImage>> train(k), val(k), test(k);
  const int n_val = (cfg.per_class_count - cfg.shots) / 2;
  std::mt19937_64 rng(cfg.seed);
  for (int c = 0; c < cfg.num_classes; ++c) {
    for (int i = 0; i < cfg.per_class_count; ++i) {
      ToyImage img = render_class_image(c, cfg.image_size, rng);
      const auto ci = static_cast<std::size_t>(c);
      if (i < cfg.shots) {
        train[ci].push_back(std::move(img));
      } else if (i < cfg.shots + n_val) {
        val[ci].push_back(std::move(img));
      } else {
        test[ci].push_back(std::move(img));
      }
    }
  }
  return ToyDataset(cfg.num_classes, cfg.image_size, std::move(train), std::move(val),
                    std::move(test));
}

void save_dataset(const ToyDataset& ds, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("save_dataset: cannot open " + path.string());
  os.write(kMagic, sizeof kMagic);
  const auto size = static_cast<std::uint32_t>(ds.image_size());
  write_u32(os, static_cast<std::uint32_t>(ds.num_classes()));
  write_u32(os, size);
  write_u32(os, size);
  constexpr Partition kParts[] = {Partition::kTrain, Partition::kVal, Partition::kTest};
  for (int c = 0; c < ds.num_classes(); ++c) {
    for (auto p : kParts) write_u32(os, static_cast<std::uint32_t>(ds.images(c, p).size()));
  }
  for (int c = 0; c < ds.num_classes(); ++c) {
    for (auto p : kParts) {
      for (const auto& img : ds.images(c, p)) {
        write_u32(os, static_cast<std::uint32_t>(img.class_id));
        write_u32(os, static_cast<std::uint32_t>(p));
        for (double v : img.pixels) write_f64(os, v);
      }
    }
  }
  if (!os) throw ConfigError("save_dataset: write failed for " + path.string());
}

ToyDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("load_dataset: cannot open " + path.string());
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ConfigError("load_dataset: bad magic in " + path.string());
  }
  const auto k = read_u32(is), h = read_u32(is), w = read_u32(is);
  if (k == 0 || k > static_cast<std::uint32_t>(kMaxClasses) || h == 0 || h != w || h > 4096) {
    throw ConfigError("load_dataset: implausible header");
  }
  std::vector<std::uint32_t> counts(3 * k);
  for (auto& c : counts) c = read_u32(is);

  std::vector<std::vector<ToyImage>> parts[3];
  for (auto& p : parts) p.resize(k);
  for (std::uint32_t c = 0; c < k; ++c) {
    for (std::uint32_t p = 0; p < 3; ++p) {
      for (std::uint32_t i = 0; i < counts[3 * c + p]; ++i) {
        const auto cls = read_u32(is), part = read_u32(is);
        if (cls != c || part != p) throw ConfigError("load_dataset: record out of order");
        ToyImage img(h, w, static_cast<int>(cls));
        for (auto& v : img.pixels) v = read_f64(is);
        parts[p][c].push_back(std::move(img));
      }
    }
  }
  return ToyDataset(static_cast<int>(k), static_cast<int>(h), std::move(parts[0]),
                    std::move(parts[1]), std::move(parts[2]));
}

}  // namespace aapl::toyworld
