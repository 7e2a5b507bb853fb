#include "ordvi/rng.hpp"

namespace ordvi {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kSplitSalt = 0xd1b54a32d192ed03ULL;
}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

Rng::Rng(std::uint64_t seed) noexcept : key_(mix64(seed ^ kSplitSalt)), counter_(0) {}

std::uint64_t Rng::next() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double Rng::uniform() noexcept {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = next();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = next();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

Rng Rng::split(std::uint64_t index) const noexcept {
  return Rng(mix64(key_ ^ mix64((index + 1) * kSplitSalt)), 0);
}

}  // namespace ordvi
