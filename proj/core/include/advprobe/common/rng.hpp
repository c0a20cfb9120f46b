#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace advprobe {

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Combines several integers into one well-mixed seed. Used to derive
/// independent streams from (campaign seed, episode, step, index, trial)
/// style coordinates so that serial and parallel runs agree.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept;

/// Counter-based generator: the full state is (seed, counter), which keeps
/// environment snapshots small. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng() = default;
  explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}
  CounterRng(std::uint64_t seed, std::uint64_t counter) noexcept
      : seed_(seed), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  friend bool operator==(const CounterRng&, const CounterRng&) = default;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace advprobe
