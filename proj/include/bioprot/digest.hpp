#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace bioprot {

using Digest = std::array<std::uint8_t, 32>;

inline constexpr std::string_view default_hash_name = "sha256";

/// Hashes the concatenation of `parts` with the named 256-bit digest
/// (any OpenSSL digest name with 32-byte output, e.g. sha256, sha3-256).
Digest hash256(std::string_view hash_name,
               std::initializer_list<std::span<const std::uint8_t>> parts);

/// Throws domain if the name is unknown or not a 256-bit digest.
void require_hash(std::string_view hash_name);

/// Constant-time equality.
bool digest_equal(const Digest& a, const Digest& b) noexcept;

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept;

std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace bioprot
