#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bioprot {

/// Failure categories. A biometric reject is never one of these.
enum class ErrorKind {
  dimension,
  domain,
  rank_deficiency,
  ingest,
  structural,
  parse,
  infeasible,
  capacity,
  integrity,
  policy,
  not_found,
  budget,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the store for users whose only records are revoked.
class RevokedError : public Error {
 public:
  explicit RevokedError(const std::string& message)
      : Error(ErrorKind::not_found, message) {}
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace bioprot
