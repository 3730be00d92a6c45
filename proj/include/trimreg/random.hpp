#pragma once

#include <cstdint>
#include <random>

namespace trimreg {

/// (seed, stream_index) fully determines every random draw made from it.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream_index = 0;

  /// A child stream; distinct indices give independent streams.
  RngSeed substream(std::uint64_t index) const;

  friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Order-dependent mixing of v into the running hash h.
std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v);

/// Bit pattern of a double, with -0.0 folded onto +0.0.
std::uint64_t double_bits(double v);

Engine make_engine(RngSeed seed);

}  // namespace trimreg
