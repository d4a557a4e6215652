#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "aapl/toyworld/image.hpp"

namespace aapl::toyworld {

enum class Partition : std::uint8_t { kTrain = 0, kVal = 1, kTest = 2 };

enum class ShapeTemplate : std::uint8_t {
  kSquare,
  kDisc,
  kCross,
  kDiagonalStripe,
  kRing,
  kChecker,
  kTriangle,
  kBar,
};

inline constexpr std::size_t kNumTemplates = 8;
inline constexpr std::size_t kNumHues = 12;
// Distinct (template, hue) combinations reachable by the class layout.
inline constexpr int kMaxClasses = 24;

struct DatasetConfig {
  int num_classes = 8;
  int per_class_count = 40;
  int image_size = 16;
  int shots = 16;
  std::uint64_t seed = 0;
};

// Class k is drawn from template k mod 8 in hue (5k mod 12)/12.
ShapeTemplate class_template(int class_id);
double class_hue(int class_id);

// One sample of a class: template at a jittered position (+-2 px) plus noise.
ToyImage render_class_image(int class_id, int image_size, std::mt19937_64& rng);

/// Images grouped by class and partition. The first ceil(K/2) classes are base.
class ToyDataset {
 public:
  ToyDataset() = default;
  ToyDataset(int num_classes, int image_size, std::vector<std::vector<ToyImage>> train,
             std::vector<std::vector<ToyImage>> val, std::vector<std::vector<ToyImage>> test);

  int num_classes() const { return num_classes_; }
  int image_size() const { return image_size_; }
  int num_base() const { return (num_classes_ + 1) / 2; }
  bool is_base(int class_id) const { return class_id < num_base(); }
  std::vector<int> base_classes() const;
  std::vector<int> new_classes() const;

  std::span<const ToyImage> images(int class_id, Partition part) const;

  bool operator==(const ToyDataset&) const = default;

 private:
  int num_classes_ = 0;
  int image_size_ = 0;
  std::vector<std::vector<ToyImage>> train_, val_, test_;
};

// Train gets `shots` images per class; the remainder splits evenly between
// val and test (test takes the odd one).
ToyDataset generate_dataset(const DatasetConfig& cfg);

// Binary layout (little-endian):
//   char[8]  "AAPLDS1\0"
//   u32      K, H, W
//   u32 x 3K per-class counts: train, val, test for class 0, then class 1, ...
//   records  for each class, partition (train, val, test), image:
//            u32 class_id, u32 partition, f64[H*W*3] pixels
void save_dataset(const ToyDataset& ds, const std::filesystem::path& path);
ToyDataset load_dataset(const std::filesystem::path& path);

}  // namespace aapl::toyworld
