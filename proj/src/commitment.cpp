#include "bioprot/commitment.hpp"

#include <string>

#include "bioprot/error.hpp"
#include "bioprot/rng.hpp"
#include "bioprot/wire.hpp"

namespace bioprot {

EccCodec EccCodec::repetition(std::uint16_t rho, std::uint32_t n) {
  EccCodec c{"repetition", rho, n};
  c.validate();
  return c;
}

void EccCodec::validate() const {
  if (name != "repetition") fail(ErrorKind::domain, "unsupported codec '" + name + "'");
  if (rho == 0 || rho % 2 == 0) fail(ErrorKind::domain, "repetition factor must be odd and positive");
  if (n == 0 || n % rho != 0) {
    fail(ErrorKind::domain, "codeword length " + std::to_string(n) + " is not a multiple of rho " +
                                std::to_string(rho));
  }
}

BitString ecc_encode(const BitString& message, const EccCodec& codec) {
  codec.validate();
  if (message.size() != codec.message_bits()) {
    fail(ErrorKind::domain, "message has " + std::to_string(message.size()) + " bits, codec expects " +
                                std::to_string(codec.message_bits()));
  }
  BitString out(codec.n);
  for (std::size_t i = 0; i < message.size(); ++i) {
    if (!message.get(i)) continue;
    for (std::size_t r = 0; r < codec.rho; ++r) out.set(i * codec.rho + r, true);
  }
  return out;
}

BitString ecc_decode(const BitString& received, const EccCodec& codec) {
  codec.validate();
  if (received.size() != codec.n) fail(ErrorKind::dimension, "received word has wrong length");
  BitString out(codec.message_bits());
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t ones = 0;
    for (std::size_t r = 0; r < codec.rho; ++r) ones += received.get(i * codec.rho + r);
    out.set(i, 2 * ones > codec.rho);
  }
  return out;
}

Digest key_digest(const Commitment& c, const BitString& key) {
  return hash256(c.hash_name, {std::span<const std::uint8_t>(c.salt), key.bytes()});
}

Commitment commit(const BitString& template_bits, const EccCodec& codec, std::uint64_t key_seed,
                  std::string_view hash_name) {
  codec.validate();
  if (template_bits.size() != codec.n) {
    fail(ErrorKind::domain, "template has " + std::to_string(template_bits.size()) +
                                " bits, codec length is " + std::to_string(codec.n));
  }
  const CounterRng root(key_seed);
  const CounterRng key_stream = root.split("key");
  const CounterRng salt_stream = root.split("salt");

  BitString key(codec.message_bits());
  for (std::size_t i = 0; i < key.size(); ++i) key.set(i, key_stream.at(i / 64) >> (i % 64) & 1U);

  Commitment c;
  c.codec = codec;
  c.hash_name = std::string(hash_name);
  for (std::size_t i = 0; i < c.salt.size(); ++i) {
    c.salt[i] = static_cast<std::uint8_t>(salt_stream.at(i / 8) >> (8 * (i % 8)));
  }
  c.helper = ecc_encode(key, codec) ^ template_bits;
  c.key_hash = key_digest(c, key);
  return c;
}

VerifyResult verify_commitment(const BitString& query, const Commitment& c) {
  if (query.size() != c.codec.n) {
    fail(ErrorKind::dimension, "query has " + std::to_string(query.size()) + " bits, commitment has " +
                                   std::to_string(c.codec.n));
  }
  const BitString offset = c.helper ^ query;
  const BitString key = ecc_decode(offset, c.codec);
  const BitString codeword = ecc_encode(key, c.codec);
  const std::size_t corrected = hamming_distance(offset, codeword);
  const bool ok = digest_equal(key_digest(c, key), c.key_hash);
  VerifyResult result{ok, std::nullopt};
  if (ok) result.corrected_errors = corrected;
  return result;
}

void write_commitment(ByteWriter& out, const Commitment& c) {
  out.raw("FCM1");
  out.str16(c.codec.name);
  out.u16(c.codec.rho);
  out.u32(c.codec.n);
  out.bytes(c.salt);
  out.bytes(c.key_hash);
  out.bytes(c.helper.bytes());
}

Commitment read_commitment(ByteReader& in, std::string_view hash_name) {
  const auto magic = in.bytes(4);
  if (std::string_view(reinterpret_cast<const char*>(magic.data()), 4) != "FCM1") {
    fail(ErrorKind::integrity, "bad commitment magic");
  }
  Commitment c;
  c.hash_name = std::string(hash_name);
  c.codec.name = in.str16();
  c.codec.rho = in.u16();
  c.codec.n = in.u32();
  try {
    c.codec.validate();
  } catch (const Error& e) {
    fail(ErrorKind::integrity, std::string("invalid codec in commitment: ") + e.what());
  }
  c.salt = in.array<16>();
  c.key_hash = in.array<32>();
  c.helper = BitString::from_bytes(c.codec.n, in.bytes((c.codec.n + 7) / 8));
  return c;
}

std::vector<std::uint8_t> serialize_commitment(const Commitment& c) {
  ByteWriter w;
  write_commitment(w, c);
  return w.take();
}

Commitment deserialize_commitment(std::span<const std::uint8_t> bytes, std::string_view hash_name) {
  ByteReader r(bytes);
  Commitment c = read_commitment(r, hash_name);
  if (r.remaining() != 0) fail(ErrorKind::integrity, "trailing bytes after commitment");
  return c;
}

}  // namespace bioprot
