#include "bioprot/rng.hpp"

#include <cmath>
#include <numbers>

namespace bioprot {

double CounterRng::normal_at(std::uint64_t index) const noexcept {
  // Normals live in the upper half of the counter space so they never alias
  // uniform draws taken from the same stream.
  const std::uint64_t base = (std::uint64_t{1} << 63) + 2 * index;
  const double u1 = 1.0 - uniform_at(base);  // (0, 1]
  const double u2 = uniform_at(base + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

CounterRng CounterRng::split(std::string_view label) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return split(h);
}

std::uint64_t CounterRng::next_below(std::uint64_t bound) noexcept {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  for (;;) {
    const std::uint64_t v = next();
    if (v < limit) return v % bound;
  }
}

}  // namespace bioprot
