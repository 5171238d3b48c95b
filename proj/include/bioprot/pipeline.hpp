#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioprot/bda.hpp"
#include "bioprot/commitment.hpp"
#include "bioprot/linalg.hpp"

namespace bioprot {

enum class TrainingMode : std::uint8_t {
  /// Each record trains its own model: the user's samples against one
  /// codeword plus a seeded synthetic cohort of background classes.
  per_user = 0,
  /// One shared model over all enrolled classes (evaluation harness).
  multi_class = 1,
};

enum class ReferenceRule : std::uint8_t {
  majority = 0,  // per-bit majority over all enrollment samples
  first = 1,     // binarization of the first sample
};

std::string_view to_string(TrainingMode mode) noexcept;
std::string_view to_string(ReferenceRule rule) noexcept;

struct SystemConfig {
  std::size_t l = 256;
  std::size_t l_r = 64;
  std::size_t n = 320;
  std::uint16_t rho = 5;
  /// Unset means ceil(n / 4).
  std::optional<std::size_t> d_min;
  std::size_t max_epochs = 1000;
  double learning_rate = 1.0;
  double margin = 1.0;
  TrainingMode mode = TrainingMode::per_user;
  std::size_t cohort_classes = 16;
  ReferenceRule reference = ReferenceRule::majority;
  std::string hash{default_hash_name};

  std::size_t min_distance() const noexcept { return d_min.value_or(default_min_distance(n)); }
  PerceptronOptions perceptron() const { return {max_epochs, learning_rate, margin}; }
  EccCodec codec() const;
  /// Throws domain / dimension on inconsistent settings.
  void validate() const;

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

/// Per-user secrets expanded from a master seed through the configured hash.
struct DerivedSeeds {
  std::uint64_t projection = 0;
  std::uint64_t codeword = 0;
  std::uint64_t key = 0;
  std::uint64_t cohort = 0;
};

DerivedSeeds derive_seeds(std::uint64_t master_seed, std::string_view hash_name);

/// Everything authentication needs. Holds no feature vector, template or key.
struct EnrollmentRecord {
  std::string user_id;
  SystemConfig config;
  std::uint64_t projection_seed = 0;
  BDAModel model;
  Commitment commitment;
  std::int64_t created_at = 0;  // unix seconds, 0 if unset

  friend bool operator==(const EnrollmentRecord&, const EnrollmentRecord&) = default;
};

struct EnrollOptions {
  std::int64_t created_at = 0;
  unsigned threads = 0;
};

/// Single-user enrollment (r >= 2 samples of length l).
EnrollmentRecord enroll(std::string user_id, std::span<const FeatureVector> samples,
                        const SystemConfig& config, std::uint64_t master_seed,
                        const EnrollOptions& options = {});

struct UserSamples {
  std::string user_id;
  std::vector<FeatureVector> samples;
  std::uint64_t master_seed = 0;
};

/// Enrolls a group. In multi_class mode one model is trained over every
/// user (codebook seeded by `system_seed`) and shared by all records; in
/// per_user mode this is enroll() per user.
std::vector<EnrollmentRecord> enroll_group(std::span<const UserSamples> users, const SystemConfig& config,
                                           std::uint64_t system_seed, const EnrollOptions& options = {});

enum class AuthMode { operational, evaluation };

struct StageDiagnostics {
  CancelableTemplate cancelable;
  BitString binary;
  std::optional<std::size_t> corrected_errors;
};

struct AuthDecision {
  bool accepted = false;
  /// Populated only in evaluation mode.
  std::optional<StageDiagnostics> diagnostics;
};

/// Regenerates the projection, binarizes the probe and verifies the
/// commitment. Malformed input throws; a biometric mismatch never does.
AuthDecision authenticate(const FeatureVector& probe, const EnrollmentRecord& record,
                          AuthMode mode = AuthMode::operational);

ProjectionMatrix regenerate_projection(const EnrollmentRecord& record);
/// The probe's binary template under the record's projection and model.
BitString binary_template(const FeatureVector& probe, const EnrollmentRecord& record);

/// Full re-enrollment under a new master seed. Throws policy if the seed
/// maps to the same projection seed, or the record is multi-class.
EnrollmentRecord revoke_reissue(const EnrollmentRecord& record, std::uint64_t new_master_seed,
                                std::span<const FeatureVector> samples, const EnrollOptions& options = {});

inline constexpr std::uint16_t record_format_version = 1;

/// "NBT1" | version u16 | config block | projection_seed u64 |
/// weights (n x l_r f64, row-major) | biases (n f64) | commitment | CRC-32.
std::vector<std::uint8_t> serialize_record(const EnrollmentRecord& record);
EnrollmentRecord deserialize_record(std::span<const std::uint8_t> bytes);

enum class RecordStatus { active, revoked };

struct StoreEntry {
  std::string user_id;
  RecordStatus status = RecordStatus::active;
  std::string file;
  std::string created;  // RFC 3339
};

/// Directory of record files plus `index.tsv` (one line per record file:
/// user_id, status, file, creation time, tab-separated).
class TemplateStore {
 public:
  explicit TemplateStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  /// Writes the record atomically and makes it the user's active record;
  /// earlier active records of the user become revoked. Returns the file
  /// name. A concurrent put for the same user is a policy error.
  std::string put(const EnrollmentRecord& record);
  /// Latest active record. not_found if unknown, RevokedError if revoked.
  EnrollmentRecord get(std::string_view user_id) const;
  /// A specific record file of the user; revoked files are refused.
  EnrollmentRecord get_file(std::string_view user_id, std::string_view file) const;
  std::vector<std::uint8_t> get_bytes(std::string_view user_id) const;
  /// One entry per user: its newest record and that record's status.
  std::vector<StoreEntry> list() const;
  /// Marks every active record of the user revoked.
  void revoke(std::string_view user_id);
  /// Every index line.
  std::vector<StoreEntry> entries() const;

 private:
  std::vector<StoreEntry> read_index() const;
  void write_index(const std::vector<StoreEntry>& entries) const;
  EnrollmentRecord load(const StoreEntry& entry) const;

  std::filesystem::path root_;
};

/// User ids are 1-64 characters of [A-Za-z0-9._@-].
void validate_user_id(std::string_view user_id);
std::string format_rfc3339(std::int64_t unix_seconds);

}  // namespace bioprot
