#include <doctest.h>

#include "bioprot/bits.hpp"
#include "bioprot/error.hpp"

using namespace bioprot;

TEST_CASE("bit packing is msb first") {
  const auto b = BitString::from_string("1000000001");
  REQUIRE(b.size() == 10);
  CHECK(b.bytes()[0] == 0x80);
  CHECK(b.bytes()[1] == 0x40);
  CHECK(b.to_string() == "1000000001");
  CHECK(b.popcount() == 2);
}

TEST_CASE("from_bytes refuses stray pad bits") {
  const std::uint8_t ok[] = {0xff, 0xc0};
  CHECK(BitString::from_bytes(10, ok).popcount() == 10);
  const std::uint8_t bad[] = {0xff, 0xc1};
  CHECK_THROWS_AS(BitString::from_bytes(10, bad), Error);
}

TEST_CASE("xor complement and distance") {
  const auto a = BitString::from_string("1100110011");
  const auto b = BitString::from_string("1010101010");
  CHECK((a ^ b).to_string() == "0110011001");
  CHECK((~a).to_string() == "0011001100");
  CHECK((~a).bytes()[1] == 0x00);  // pad stays clear
  CHECK(hamming_distance(a, b) == 5);
  CHECK(hamming_distance(a, ~a) == 10);
  CHECK_THROWS_AS(hamming_distance(a, BitString(9)), Error);
}

TEST_CASE("parsing rejects junk") {
  CHECK_THROWS_AS(BitString::from_string("10x"), Error);
}
