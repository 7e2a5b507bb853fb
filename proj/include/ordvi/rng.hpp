#pragma once

#include <cstdint>
#include <limits>
#include <span>

namespace ordvi {

/// Counter-based splittable generator. The i-th output of a stream is a
/// SplitMix64 finalization of (key + i * golden), so a stream is fully determined
/// by its key, and `split` derives child keys without advancing the parent.
/// Every random decision in the library flows from one of these.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept;

  result_type operator()() noexcept { return next(); }
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  std::uint64_t next() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Child stream keyed by (this key, index). Does not consume from this stream.
  Rng split(std::uint64_t index) const noexcept;
  Rng split(std::uint64_t a, std::uint64_t b) const noexcept { return split(a).split(b); }

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  Rng(std::uint64_t key, std::uint64_t counter) noexcept : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace ordvi
