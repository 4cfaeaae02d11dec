#pragma once

#include <cstdint>
#include <random>

namespace ahfl {

using Rng = std::mt19937_64;

/// Independent RNG streams derived from one run seed. The timing stream is
/// consumed only by event scheduling so the learning side cannot shift it.
enum class Stream : std::uint32_t {
  kTiming = 0,
  kLearning = 1,
  kDataset = 2,
};

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t substream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(substream),
                    static_cast<std::uint32_t>(substream >> 32)};
  return Rng(seq);
}

}  // namespace ahfl
