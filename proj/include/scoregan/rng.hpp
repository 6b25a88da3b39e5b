#pragma once

#include "scoregan/common.hpp"

#include <cstdint>
#include <string_view>

namespace scoregan {

/// Counter-based pseudo-random generator (splitmix64 over seed + counter).
/// Identical seed and call sequence give identical output on every platform;
/// the full state is the (seed, counter) pair, so it serializes exactly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), counter_(0) {}
  Rng(std::uint64_t seed, std::uint64_t counter) : seed_(seed), counter_(counter) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  Scalar uniform() { return static_cast<Scalar>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller. Draws two uniforms per call so the
  /// (seed, counter) state stays the complete description of the stream.
  Scalar normal() {
    Scalar u1 = 1.0 - uniform();
    Scalar u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Draw an index from a probability column by CDF walk in index order.
  Eigen::Index categorical(const Vector& probs) {
    Scalar u = uniform();
    Scalar acc = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return probs.size() - 1;
  }

  /// Independent child stream keyed by an integer; deterministic in (seed, key).
  Rng fork(std::uint64_t key) const {
    std::uint64_t z = seed_ ^ (key + 0x9E3779B97F4A7C15ULL + (seed_ << 6) + (seed_ >> 2));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return Rng(z ^ (z >> 31));
  }

  /// Child stream keyed by a label, for wiring one CLI seed to many consumers.
  Rng fork(std::string_view label) const {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    return fork(h);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

/// Matrix with i.i.d. uniform entries in [lo, hi).
inline Matrix uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                             Scalar lo, Scalar hi) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

}  // namespace scoregan
