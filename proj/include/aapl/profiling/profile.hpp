#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "aapl/profiling/sampler.hpp"
#include "aapl/profiling/silhouette.hpp"
#include "aapl/promptcore/prompt_model.hpp"
#include "aapl/toyworld/dataset.hpp"

namespace aapl::profiling {

struct DeltaRecord {
  int class_id = 0;
  Augmentation augmentation = Augmentation::kHFlip;
  int epoch = 0;
  std::vector<double> values;
  bool operator==(const DeltaRecord&) const = default;
};

struct ProfileConfig {
  // Validation images drawn round-robin over the base classes; each one
  // yields a delta token for every augmentation type.
  int samples = 100;
  std::uint64_t seed = 0;
  int epoch = 0;
  promptcore::DeltaVariant variant = promptcore::DeltaVariant::kSameImage;
  bool parallel = true;
};

// samples x 14 records, sample-major, augmentations in enum order.
std::vector<DeltaRecord> collect_delta_tokens(const promptcore::PromptModel& model,
                                              const toyworld::ToyDataset& ds,
                                              const ProfileConfig& cfg);

// Silhouette of the records clustered by augmentation type.
SilhouetteReport profile_report(std::span<const DeltaRecord> records);

// CSV with header "class_id,augmentation,epoch,d0,...,d{n-1}", one row per
// record, values printed with 17 significant digits.
void write_embedding_dump(std::span<const DeltaRecord> records, const std::filesystem::path& path);
std::vector<DeltaRecord> read_embedding_dump(const std::filesystem::path& path);

}  // namespace aapl::profiling
