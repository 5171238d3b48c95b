#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bioprot/bits.hpp"
#include "bioprot/digest.hpp"

namespace bioprot {

class ByteWriter;
class ByteReader;

/// Block repetition code: each message bit is repeated rho times
/// contiguously; decoding is a per-block majority vote.
struct EccCodec {
  std::string name = "repetition";
  std::uint16_t rho = 5;
  std::uint32_t n = 0;

  /// Validates rho odd, rho | n, n > 0.
  static EccCodec repetition(std::uint16_t rho, std::uint32_t n);

  std::size_t message_bits() const noexcept { return n / rho; }
  std::size_t correction_radius() const noexcept { return (rho - 1U) / 2U; }
  void validate() const;

  friend bool operator==(const EccCodec&, const EccCodec&) = default;
};

BitString ecc_encode(const BitString& message, const EccCodec& codec);
BitString ecc_decode(const BitString& received, const EccCodec& codec);

using Salt = std::array<std::uint8_t, 16>;

/// Fuzzy commitment of a binary template. Holds neither key nor template.
struct Commitment {
  EccCodec codec;
  Salt salt{};
  Digest key_hash{};
  BitString helper;
  /// Digest used for key_hash; carried by the enclosing record on the wire.
  std::string hash_name{default_hash_name};

  friend bool operator==(const Commitment&, const Commitment&) = default;
};

/// Key and salt come from CounterRng(key_seed) sub-streams.
Commitment commit(const BitString& template_bits, const EccCodec& codec, std::uint64_t key_seed,
                  std::string_view hash_name = default_hash_name);

struct VerifyResult {
  bool accepted = false;
  /// Bits the decoder corrected; set only on accept.
  std::optional<std::size_t> corrected_errors;
};

/// Decodes helper ^ query, hashes with the stored salt and compares in
/// constant time. Every query takes the same path; reject carries nothing.
VerifyResult verify_commitment(const BitString& query, const Commitment& c);

Digest key_digest(const Commitment& c, const BitString& key);

/// "FCM1" | name (u16 len + bytes) | rho u16 | n u32 | salt[16] | key_hash[32] | helper.
void write_commitment(ByteWriter& out, const Commitment& c);
Commitment read_commitment(ByteReader& in, std::string_view hash_name = default_hash_name);
std::vector<std::uint8_t> serialize_commitment(const Commitment& c);
Commitment deserialize_commitment(std::span<const std::uint8_t> bytes,
                                  std::string_view hash_name = default_hash_name);

}  // namespace bioprot
