#include "trimreg/random.hpp"

#include <bit>

namespace trimreg {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ (splitmix64(v) + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2)));
}

std::uint64_t double_bits(double v) {
  if (v == 0.0) v = 0.0;
  return std::bit_cast<std::uint64_t>(v);
}

RngSeed RngSeed::substream(std::uint64_t index) const {
  return RngSeed{seed, hash_combine(stream_index, index)};
}

Engine make_engine(RngSeed s) {
  const std::uint64_t a = splitmix64(s.seed);
  const std::uint64_t b = hash_combine(a, s.stream_index);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Engine(seq);
}

}  // namespace trimreg
