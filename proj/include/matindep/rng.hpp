#pragma once

#include <cstdint>

namespace matindep {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent 64-bit key from a master seed and a stream index
// (replication number, Monte-Carlo draw, ...).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Counter-based generator: the k-th draw depends only on (key, k), so draws
// can be produced in any order or on any thread with identical results.
// Normals are obtained by inverting the normal CDF at the uniform draw.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t bits(std::uint64_t counter) const;
  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform(std::uint64_t counter) const;
  double normal(std::uint64_t counter) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

}  // namespace matindep
