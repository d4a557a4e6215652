#include "aapl/promptcore/checkpoint.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "aapl/error.hpp"

namespace aapl::promptcore {

namespace {

constexpr char kMagic[8] = {'A', 'A', 'P', 'L', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char b[sizeof(T)];
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw ConfigError("checkpoint: truncated file");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  T v;
  std::memcpy(&v, &bits, sizeof(T));
  return v;
}

NamedBlock block_of(std::string name, const Tensor& t) {
  return {std::move(name), t.shape(), std::vector<double>(t.data().begin(), t.data().end())};
}

}  // namespace

std::vector<NamedBlock> model_blocks(const PromptModel& model) {
  return {block_of("context", model.context()), block_of("metanet.in", model.metanet_in()),
          block_of("metanet.out", model.metanet_out())};
}

void write_checkpoint(const std::vector<NamedBlock>& blocks, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("checkpoint: cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, kCheckpointVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(b.name.size()));
    os.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(b.shape.size()));
    for (auto e : b.shape) put<std::uint64_t>(os, e);
    for (double v : b.data) put<double>(os, v);
  }
  if (!os) throw ConfigError("checkpoint: write failed for " + path.string());
}

std::vector<NamedBlock> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("checkpoint: cannot open " + path.string());
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ConfigError("checkpoint: bad magic in " + path.string());
  }
  const auto version = get<std::uint32_t>(is);
  if (version != kCheckpointVersion) {
    throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto count = get<std::uint32_t>(is);
  if (count > 1024) throw ConfigError("checkpoint: implausible block count");
  std::vector<NamedBlock> blocks;
  for (std::uint32_t k = 0; k < count; ++k) {
    NamedBlock b;
    const auto len = get<std::uint32_t>(is);
    if (len > 4096) throw ConfigError("checkpoint: implausible name length");
    b.name.resize(len);
    if (!is.read(b.name.data(), len)) throw ConfigError("checkpoint: truncated file");
    const auto rank = get<std::uint32_t>(is);
    if (rank > 8) throw ConfigError("checkpoint: implausible rank");
    std::size_t n = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      b.shape.push_back(get<std::uint64_t>(is));
      n *= b.shape.back();
    }
    if (n > (std::size_t{1} << 28)) throw ConfigError("checkpoint: implausible block size");
    b.data.resize(n);
    for (auto& v : b.data) v = get<double>(is);
    blocks.push_back(std::move(b));
  }
  return blocks;
}

void save_checkpoint(const PromptModel& model, const std::filesystem::path& path) {
  write_checkpoint(model_blocks(model), path);
}

void load_checkpoint(PromptModel& model, const std::filesystem::path& path) {
  auto blocks = read_checkpoint(path);
  auto params = model.parameters();
  const auto expected = model_blocks(model);
  if (blocks.size() != expected.size()) throw ConfigError("checkpoint: block count mismatch");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].name != expected[i].name || blocks[i].shape != expected[i].shape) {
      throw ConfigError("checkpoint: block '" + blocks[i].name + "' " +
                        numcore::shape_to_string(blocks[i].shape) + " does not match model block '" +
                        expected[i].name + "' " + numcore::shape_to_string(expected[i].shape));
    }
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    auto dst = params[i].mutable_data();
    std::copy(blocks[i].data.begin(), blocks[i].data.end(), dst.begin());
  }
}

}  // namespace aapl::promptcore
