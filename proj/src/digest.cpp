#include "bioprot/digest.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <zlib.h>

#include <memory>
#include <string>

#include "bioprot/error.hpp"

namespace bioprot {

namespace {

const EVP_MD* lookup(std::string_view hash_name) {
  const std::string name(hash_name);
  const EVP_MD* md = EVP_get_digestbyname(name.c_str());
  if (md == nullptr) fail(ErrorKind::domain, "unknown hash '" + name + "'");
  if (EVP_MD_size(md) != 32) fail(ErrorKind::domain, "hash '" + name + "' is not a 256-bit digest");
  return md;
}

}  // namespace

void require_hash(std::string_view hash_name) { lookup(hash_name); }

Digest hash256(std::string_view hash_name, std::initializer_list<std::span<const std::uint8_t>> parts) {
  const EVP_MD* md = lookup(hash_name);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1) {
    fail(ErrorKind::domain, "digest initialisation failed");
  }
  for (const auto& part : parts) {
    if (EVP_DigestUpdate(ctx.get(), part.data(), part.size()) != 1) fail(ErrorKind::domain, "digest update failed");
  }
  Digest out{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    fail(ErrorKind::domain, "digest finalisation failed");
  }
  return out;
}

bool digest_equal(const Digest& a, const Digest& b) noexcept {
  return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; records are far below 4 GiB.
  crc = ::crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

}  // namespace bioprot
