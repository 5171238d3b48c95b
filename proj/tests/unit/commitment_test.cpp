#include <doctest.h>

#include "bioprot/commitment.hpp"
#include "bioprot/digest.hpp"
#include "bioprot/error.hpp"
#include "bioprot/rng.hpp"

using namespace bioprot;

namespace {

std::span<const std::uint8_t> text(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

BitString random_bits(std::size_t n, std::uint64_t seed) {
  const CounterRng rng(seed);
  BitString b(n);
  for (std::size_t i = 0; i < n; ++i) b.set(i, rng.at(i) & 1);
  return b;
}

}  // namespace

TEST_CASE("digest and checksum vectors") {
  CHECK(to_hex(hash256("sha256", {text("abc")})) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(hash256("sha256", {text("a"), text("bc")}) == hash256("sha256", {text("abc")}));
  CHECK(crc32(text("123456789")) == 0xCBF43926u);
  CHECK_THROWS_AS(require_hash("md5"), Error);
  CHECK_THROWS_AS(require_hash("no-such-digest"), Error);
  require_hash("sha3-256");
}

TEST_CASE("repetition code") {
  const auto c3 = EccCodec::repetition(3, 9);
  CHECK(ecc_encode(BitString::from_string("101"), c3).to_string() == "111000111");
  CHECK(ecc_encode(BitString(3), c3).popcount() == 0);
  CHECK(ecc_decode(BitString::from_string("110"), EccCodec::repetition(3, 3)).to_string() == "1");
  CHECK_THROWS_AS(ecc_encode(BitString(4), c3), Error);
  CHECK_THROWS_AS(EccCodec::repetition(4, 8), Error);
  CHECK_THROWS_AS(EccCodec::repetition(3, 10), Error);
  CHECK(EccCodec::repetition(5, 40).correction_radius() == 2);

  // t + 1 flips in one block move that bit.
  const auto c5 = EccCodec::repetition(5, 10);
  auto word = ecc_encode(BitString::from_string("10"), c5);
  for (std::size_t i = 5; i < 8; ++i) word.flip(i);
  CHECK(ecc_decode(word, c5).to_string() == "11");
}

TEST_CASE("commitment") {
  const auto codec = EccCodec::repetition(5, 40);
  const auto tmpl = random_bits(40, 1);
  const auto c = commit(tmpl, codec, 99);

  SUBCASE("exact match") {
    const auto r = verify_commitment(tmpl, c);
    CHECK(r.accepted);
    CHECK(r.corrected_errors == std::size_t{0});
  }
  SUBCASE("within radius, every block") {
    auto q = tmpl;
    for (std::size_t b = 0; b < 8; ++b) {
      q.flip(b * 5 + b % 5);
      q.flip(b * 5 + (b + 2) % 5);
    }
    const auto r = verify_commitment(q, c);
    CHECK(r.accepted);
    CHECK(r.corrected_errors == std::size_t{16});
  }
  SUBCASE("complement") {
    const auto r = verify_commitment(~tmpl, c);
    CHECK_FALSE(r.accepted);
    CHECK_FALSE(r.corrected_errors.has_value());
  }
  SUBCASE("one block past radius") {
    auto q = tmpl;
    for (std::size_t i = 10; i < 13; ++i) q.flip(i);
    CHECK_FALSE(verify_commitment(q, c).accepted);
  }
  SUBCASE("helper is a codeword offset by the template") {
    const auto word = c.helper ^ tmpl;
    CHECK(ecc_encode(ecc_decode(word, codec), codec) == word);
    CHECK(c.helper != tmpl);
    CHECK(commit(tmpl, codec, 100).helper != c.helper);
    CHECK(commit(tmpl, codec, 99) == c);
  }
  SUBCASE("wrong length") {
    CHECK_THROWS_AS(commit(random_bits(39, 1), codec, 1), Error);
    CHECK_THROWS_AS(verify_commitment(random_bits(39, 1), c), Error);
  }
  SUBCASE("serialization") {
    const auto bytes = serialize_commitment(c);
    CHECK(deserialize_commitment(bytes) == c);
    auto bad = bytes;
    bad[0] ^= 1;
    CHECK_THROWS_AS(deserialize_commitment(bad), Error);
    bad = bytes;
    bad.pop_back();
    CHECK_THROWS_AS(deserialize_commitment(bad), Error);
  }
}

TEST_CASE("zero template leaves the codeword in the helper") {
  const auto codec = EccCodec::repetition(5, 20);
  const BitString zero(20);
  CHECK((ecc_encode(BitString(4), codec) ^ zero).popcount() == 0);
  const auto c = commit(zero, codec, 5);
  const auto key = ecc_decode(c.helper, codec);
  CHECK(ecc_encode(key, codec) == c.helper);
  CHECK(digest_equal(key_digest(c, key), c.key_hash));
}

TEST_CASE("exhaustive radius at 4 message bits") {
  const auto codec = EccCodec::repetition(5, 20);
  // All patterns with at most two flips in a block.
  std::vector<std::uint8_t> patterns;
  for (std::uint8_t p = 0; p < 32; ++p) {
    if (__builtin_popcount(p) <= 2) patterns.push_back(p);
  }
  std::size_t checked = 0;
  for (std::uint8_t m = 0; m < 16; ++m) {
    BitString msg(4);
    for (std::size_t i = 0; i < 4; ++i) msg.set(i, (m >> i) & 1);
    const auto word = ecc_encode(msg, codec);
    for (auto p0 : patterns)
      for (auto p1 : patterns)
        for (auto p2 : patterns)
          for (auto p3 : patterns) {
            auto w = word;
            const std::uint8_t ps[] = {p0, p1, p2, p3};
            for (std::size_t b = 0; b < 4; ++b) {
              for (std::size_t j = 0; j < 5; ++j) {
                if ((ps[b] >> j) & 1) w.flip(b * 5 + j);
              }
            }
            REQUIRE(ecc_decode(w, codec) == msg);
            ++checked;
          }
  }
  CHECK(checked == 16u * 16 * 16 * 16 * 16);
}
