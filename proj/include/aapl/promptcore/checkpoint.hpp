#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aapl/numcore/tensor.hpp"
#include "aapl/promptcore/prompt_model.hpp"

namespace aapl::promptcore {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedBlock {
  std::string name;
  numcore::Shape shape;
  std::vector<double> data;
  bool operator==(const NamedBlock&) const = default;
};

// Blocks "context", "metanet.in", "metanet.out", in that order.
std::vector<NamedBlock> model_blocks(const PromptModel& model);

// Layout (little-endian):
//   char[8] "AAPLCKPT", u32 version, u32 block count
//   per block: u32 name length, name bytes, u32 rank, u64 extents[rank],
//              f64 data[prod(extents)]
void write_checkpoint(const std::vector<NamedBlock>& blocks, const std::filesystem::path& path);
std::vector<NamedBlock> read_checkpoint(const std::filesystem::path& path);

void save_checkpoint(const PromptModel& model, const std::filesystem::path& path);
// Overwrites the model's parameters; names and shapes must match exactly.
void load_checkpoint(PromptModel& model, const std::filesystem::path& path);

}  // namespace aapl::promptcore
