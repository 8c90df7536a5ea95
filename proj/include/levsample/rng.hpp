#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

#include "levsample/core.hpp"

namespace levsample {

/// SplitMix64 finalizer; a bijection on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream key from a master seed and a path of
/// indices, e.g. derive_seed(master, {trial, 1}). Order-sensitive.
constexpr Seed derive_seed(Seed master, std::initializer_list<std::uint64_t> path) noexcept {
  Seed key = mix64(master ^ 0x6c657673616d706cULL);
  for (std::uint64_t step : path) key = mix64(key ^ mix64(step + 0x632be59bd9b4e019ULL));
  return key;
}

/// Counter-based generator: the k-th output is a pure function of
/// (key, k), so any stream can be recreated from its key alone.
/// Satisfies UniformRandomBitGenerator for use with <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(Seed key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t position() const noexcept { return counter_; }

 private:
  Seed key_;
  std::uint64_t counter_ = 0;
};

}  // namespace levsample
