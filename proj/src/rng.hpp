#pragma once

#include <cstdint>
#include <initializer_list>

namespace qwbc {

// Counter-based randomness. Every draw is a pure function of a tuple of
// 64-bit coordinates (seed, domain, trial, node, round, ...), so trials can
// run on any number of workers, in any order, and schemes that skip a draw
// do not shift anybody else's stream.

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6a09e667f3bcc909ull;
  for (std::uint64_t w : words) {
    h ^= mix64(w);
    h *= 0x100000001b3ull;
    h = mix64(h);
  }
  return h;
}

// 53-bit mantissa draw in [0, 1).
inline constexpr double u01_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline constexpr double point_u01(std::initializer_list<std::uint64_t> coords) {
  return u01_from_bits(hash_words(coords));
}

// Sequential stream keyed by a coordinate tuple; used where draws are
// consumed in a fixed documented order (graph generation).
class CounterStream {
public:
  explicit CounterStream(std::initializer_list<std::uint64_t> key) : key_(hash_words(key)) {}

  std::uint64_t next_u64() { return hash_words({key_, counter_++}); }
  double next_u01() { return u01_from_bits(next_u64()); }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Domain tags keep unrelated draw families independent.
enum StreamDomain : std::uint64_t {
  kDomainGraph = 0xD1,
  kDomainInitValues = 0xD2,
  kDomainQuantizer = 0xD3,
};

}  // namespace qwbc
