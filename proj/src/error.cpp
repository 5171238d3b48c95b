#include "bioprot/error.hpp"

namespace bioprot {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::domain: return "domain";
    case ErrorKind::rank_deficiency: return "rank-deficiency";
    case ErrorKind::ingest: return "ingest";
    case ErrorKind::structural: return "structural";
    case ErrorKind::parse: return "parse";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::integrity: return "integrity";
    case ErrorKind::policy: return "policy";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::budget: return "budget";
  }
  return "unknown";
}

}  // namespace bioprot
