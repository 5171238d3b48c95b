#pragma once

#include <cstdint>
#include <string_view>

namespace bioprot {

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based SplitMix64 stream.
///
/// Output i is mix(seed + (i + 1) * golden_gamma), so any position can be
/// addressed directly and sub-streams are split off by key. Normals use the
/// cosine branch of Box-Muller over draws (2i, 2i + 1).
class CounterRng {
 public:
  static constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

  explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t at(std::uint64_t index) const noexcept {
    return splitmix64_mix(seed_ + (index + 1) * golden_gamma);
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform_at(std::uint64_t index) const noexcept {
    return static_cast<double>(at(index) >> 11) * 0x1.0p-53;
  }

  double normal_at(std::uint64_t index) const noexcept;

  /// Independent child stream keyed by an integer tag.
  CounterRng split(std::uint64_t tag) const noexcept {
    return CounterRng(splitmix64_mix(seed_ ^ splitmix64_mix(tag + golden_gamma)));
  }

  /// Child stream keyed by a short label (FNV-1a of the label).
  CounterRng split(std::string_view label) const noexcept;

  // Sequential convenience interface.
  std::uint64_t next() noexcept { return at(position_++); }
  double next_uniform() noexcept { return uniform_at(position_++); }
  double next_normal() noexcept { return normal_at(normal_position_++); }
  /// Uniform integer in [0, bound), bound > 0, rejection sampled.
  std::uint64_t next_below(std::uint64_t bound) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t position_ = 0;
  // Normal draws use a separate index range so mixing both calls is stable.
  std::uint64_t normal_position_ = 0;
};

}  // namespace bioprot
