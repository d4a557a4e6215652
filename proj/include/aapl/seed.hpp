#pragma once

#include <cstdint>

namespace aapl {

// Independent RNG streams fanned out from one master seed.
enum class SeedStream : std::uint64_t {
  kDataset = 1,
  kEncoders = 2,
  kInit = 3,
  kEpisode = 4,
  kProfiling = 6,
  kShuffle = 7,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// seed(master, stream, i) = splitmix64(splitmix64(master ^ splitmix64(stream)) + i).
// Each (stream, counter) pair names one reproducible sub-seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, SeedStream stream,
                                    std::uint64_t counter = 0) {
  const std::uint64_t stream_key = splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(stream)));
  return splitmix64(stream_key + counter);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t counter) {
  return splitmix64(splitmix64(parent) + counter);
}

}  // namespace aapl
