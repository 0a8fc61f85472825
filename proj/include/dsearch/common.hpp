#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dsearch {

// Thrown by every module; the CLI turns these into one-line error messages.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Small deterministic generator (splitmix64). Sequences depend only on the
// seed, not on the standard library's distribution internals, so artifacts
// are reproducible byte-for-byte for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // in [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // in [0, n); n must be positive
  std::size_t next_index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

  // stable derivation of an independent stream, e.g. one per tree
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed ^ (0x5851f42d4c957f2dULL * (stream + 1)));
    return r.next_u64();
  }

 private:
  std::uint64_t state_;
};

}  // namespace dsearch
