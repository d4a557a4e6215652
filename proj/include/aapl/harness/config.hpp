#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aapl/losses/losses.hpp"
#include "aapl/numcore/optim.hpp"
#include "aapl/promptcore/prompt_model.hpp"
#include "aapl/toyworld/augment.hpp"

namespace aapl::harness {

struct DatasetSection {
  int classes = 8;
  int per_class_count = 40;
  int image_size = 16;
  int shots = 16;
};

struct ModelSection {
  int feature_dim = 32;
  int context_length = 4;
  int bottleneck_ratio = 0;  // 0: 16 when d >= 32, else 4
  double temperature = 0.07;
  int text_hidden = 64;
  double alignment = 1.0;
  double context_init_sigma = 0.02;
};

struct TrainSection {
  int epochs = 10;
  double lr = 0.002;
  double momentum = 0.9;
  numcore::LrSchedule schedule = numcore::LrSchedule::kCosine;
  double alpha = 0.2;
  double beta = 1.0;
  double margin = 0.2;
  losses::ConstraintMode constraint_mode = losses::ConstraintMode::kConstraints4;
  bool wrs = false;
  promptcore::DeltaVariant delta_variant = promptcore::DeltaVariant::kSameImage;
  // Allowed augmentation types; empty means all 14.
  std::vector<toyworld::Augmentation> augmentations;
};

struct ProfilingSection {
  int samples = 100;
  double temperature = 1.0;
  bool standardize = false;
};

struct OutputSection {
  std::string dir = "runs/default";
};

/// Every knob of one run. Stored as a flat key=value file with [section]
/// headers; see docs/config.md for the schema.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  DatasetSection dataset;
  ModelSection model;
  TrainSection train;
  ProfilingSection profiling;
  OutputSection output;

  bool operator==(const ExperimentConfig&) const;
};

void validate(const ExperimentConfig& cfg);

std::string to_config_text(const ExperimentConfig& cfg);
// Unknown keys, malformed values and duplicate keys throw ConfigError naming the line.
ExperimentConfig parse_config_text(const std::string& text);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

// Apply a single "key=value" or "section.key=value" override.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

std::string_view schedule_name(numcore::LrSchedule s);
std::string_view delta_variant_name(promptcore::DeltaVariant v);

}  // namespace aapl::harness
