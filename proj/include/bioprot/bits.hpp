#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bioprot {

/// Packed bit string. Bit 0 is the MSB of byte 0; pad bits are zero.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t size) : size_(size), bytes_((size + 7) / 8, 0) {}

  /// From a string of '0' / '1' characters.
  static BitString from_string(std::string_view bits);
  static BitString from_bools(std::span<const bool> bits);
  /// Adopts packed bytes; throws integrity if pad bits are set.
  static BitString from_bytes(std::size_t size, std::span<const std::uint8_t> bytes);

  std::size_t size() const noexcept { return size_; }
  bool get(std::size_t i) const noexcept {
    return (bytes_[i >> 3] >> (7 - (i & 7))) & 1U;
  }
  void set(std::size_t i, bool value) noexcept {
    const auto mask = static_cast<std::uint8_t>(0x80U >> (i & 7));
    if (value) {
      bytes_[i >> 3] |= mask;
    } else {
      bytes_[i >> 3] &= static_cast<std::uint8_t>(~mask);
    }
  }
  void flip(std::size_t i) noexcept { set(i, !get(i)); }

  std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }
  std::size_t popcount() const noexcept;
  std::string to_string() const;

  BitString operator^(const BitString& other) const;
  BitString operator~() const;

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint8_t> bytes_;
};

std::size_t hamming_distance(const BitString& a, const BitString& b);

}  // namespace bioprot
