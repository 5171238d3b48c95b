#include "bioprot/bits.hpp"

#include <bit>

#include "bioprot/error.hpp"

namespace bioprot {

BitString BitString::from_string(std::string_view bits) {
  BitString out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1') fail(ErrorKind::parse, "bit strings use only 0 and 1");
    out.set(i, bits[i] == '1');
  }
  return out;
}

BitString BitString::from_bools(std::span<const bool> bits) {
  BitString out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) out.set(i, bits[i]);
  return out;
}

BitString BitString::from_bytes(std::size_t size, std::span<const std::uint8_t> bytes) {
  if (bytes.size() != (size + 7) / 8) fail(ErrorKind::integrity, "packed length mismatch");
  BitString out(size);
  out.bytes_.assign(bytes.begin(), bytes.end());
  if (size % 8 != 0) {
    const auto pad = static_cast<std::uint8_t>(0xFFU >> (size % 8));
    if (out.bytes_.back() & pad) fail(ErrorKind::integrity, "nonzero pad bits");
  }
  return out;
}

std::size_t BitString::popcount() const noexcept {
  std::size_t total = 0;
  for (auto b : bytes_) total += static_cast<std::size_t>(std::popcount(b));
  return total;
}

std::string BitString::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if (get(i)) s[i] = '1';
  }
  return s;
}

BitString BitString::operator^(const BitString& other) const {
  if (size_ != other.size_) fail(ErrorKind::dimension, "xor of bit strings with different lengths");
  BitString out(size_);
  for (std::size_t i = 0; i < bytes_.size(); ++i) out.bytes_[i] = bytes_[i] ^ other.bytes_[i];
  return out;
}

BitString BitString::operator~() const {
  BitString out(size_);
  for (std::size_t i = 0; i < bytes_.size(); ++i) out.bytes_[i] = static_cast<std::uint8_t>(~bytes_[i]);
  if (size_ % 8 != 0) out.bytes_.back() &= static_cast<std::uint8_t>(0xFFU << (8 - size_ % 8));
  return out;
}

std::size_t hamming_distance(const BitString& a, const BitString& b) {
  return (a ^ b).popcount();
}

}  // namespace bioprot
