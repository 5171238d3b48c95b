#include <doctest.h>

#include <cmath>

#include "bioprot/rng.hpp"

using namespace bioprot;

TEST_CASE("counter rng matches reference splitmix64 sequence") {
  // Reference splitmix64 from state 0.
  const CounterRng rng(0);
  CHECK(rng.at(0) == 0xe220a8397b1dcdafULL);
  CHECK(rng.at(1) == 0x6e789e6aa1b965f4ULL);
  CHECK(rng.at(2) == 0x06c45d188009454fULL);
}

TEST_CASE("sequential and indexed access agree") {
  CounterRng a(99);
  const CounterRng b(99);
  for (std::uint64_t i = 0; i < 16; ++i) CHECK(a.next() == b.at(i));
  CounterRng c(99);
  for (std::uint64_t i = 0; i < 8; ++i) CHECK(c.next_normal() == b.normal_at(i));
}

TEST_CASE("uniform and normal draws look right") {
  const CounterRng rng(2024);
  double sum = 0, sq = 0, usum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal_at(static_cast<std::uint64_t>(i));
    sum += z;
    sq += z * z;
    const double u = rng.uniform_at(static_cast<std::uint64_t>(i));
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    usum += u;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
  CHECK(std::abs(usum / n - 0.5) < 0.005);
}

TEST_CASE("splits are distinct and stable") {
  const CounterRng root(5);
  CHECK(root.split("key").seed() == root.split("key").seed());
  CHECK(root.split("key").seed() != root.split("salt").seed());
  CHECK(root.split(1).seed() != root.split(2).seed());
  CHECK(root.split(1).seed() != CounterRng(6).split(1).seed());
}

TEST_CASE("next_below stays in range") {
  CounterRng rng(3);
  int counts[3] = {};
  for (int i = 0; i < 3000; ++i) {
    const auto v = rng.next_below(3);
    REQUIRE(v < 3);
    ++counts[v];
  }
  for (int c : counts) CHECK(c > 850);
}
