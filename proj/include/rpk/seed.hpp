#pragma once

#include <cstdint>
#include <random>

namespace rpk {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// A base seed plus a stream id. Each ensemble sample draws from its own
// stream so samples are independent of evaluation order.
struct SamplerSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  SamplerSeed for_stream(std::uint64_t s) const { return {seed, s}; }

  std::mt19937_64 engine() const {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)));
  }

  friend bool operator==(const SamplerSeed&, const SamplerSeed&) = default;
};

}  // namespace rpk
