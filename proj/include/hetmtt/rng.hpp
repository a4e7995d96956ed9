#pragma once

#include <cstdint>
#include <random>

namespace hetmtt {

using Rng = std::mt19937_64;

/// Independent substreams derived from one scenario seed, so that drawing more
/// numbers in one module never shifts another module's sequence.
enum class Stream : std::uint32_t { robots = 1, targets = 2, measurements = 3, spawns = 4, sites = 5 };

inline Rng make_stream(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), stream,
                    0x9e3779b9u};
  return Rng(seq);
}

inline Rng make_stream(std::uint64_t seed, Stream stream) {
  return make_stream(seed, static_cast<std::uint32_t>(stream));
}

}  // namespace hetmtt
