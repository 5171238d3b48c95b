#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioprot/bits.hpp"
#include "bioprot/commitment.hpp"
#include "bioprot/pipeline.hpp"

namespace bioprot {

/// Brute-force pricing of one stage: guessing a Kc-bit output costs
/// 2^(Kc-1) operations on average.
struct StageStrength {
  std::string stage;
  std::uint64_t kc = 0;
  std::uint64_t strength_bits = 0;     // Kc - 1
  std::uint64_t guess_space_log2 = 0;  // Kc
};

/// Password length over a 40-symbol alphabet with at least the same work.
struct CharsetStrength {
  std::uint32_t alphabet = 40;
  std::uint64_t length = 0;
  double space_log2 = 0.0;  // length * log2(alphabet)
};

struct SecurityReport {
  std::vector<StageStrength> stages;
  std::string weakest_stage;
  std::uint64_t overall_bits = 0;  // min strength over stages
  CharsetStrength charset;
};

struct KcOverride {
  std::string stage;
  std::uint64_t kc = 0;
};

/// Parses "rp=3772,fc=11340". Aliases: rp, random_projection, bda, fc,
/// fuzzy_commitment, full, hybrid_full.
std::vector<KcOverride> parse_kc_overrides(std::string_view text);
/// The published rows: random projection 3772, fuzzy commitment 11340,
/// hybrid full 6810, full 6800.
std::vector<KcOverride> published_kc();

StageStrength stage_strength(std::string stage, std::uint64_t kc);

/// Measured lengths: random_projection = l_r * 64 (float64 serialization),
/// bda = n, fuzzy_commitment = helper length n, full = key bits n / rho.
SecurityReport strength_report(const SystemConfig& config, std::span<const KcOverride> overrides = {});
SecurityReport strength_report(const EnrollmentRecord& record, std::span<const KcOverride> overrides = {});

void write_report_text(const SecurityReport& report, std::ostream& out);
/// Header "stage,Kc,strength_bits".
void write_report_csv(const SecurityReport& report, std::ostream& out);
std::vector<StageStrength> parse_report_csv(std::string_view text);

// ---------------------------------------------------------------- attacks

struct AttackOutcome {
  std::string attack;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double empirical_rate = 0.0;
  double theoretical_rate = 0.0;
  /// |empirical - theoretical| within three binomial standard deviations.
  bool consistent = false;
};

AttackOutcome make_outcome(std::string attack, std::uint64_t trials, std::uint64_t successes, double theoretical);

/// Number of n-bit templates a repetition-code commitment accepts:
/// (sum_{e<=t} C(rho, e))^(n / rho). Budget error if it overflows 64 bits.
std::uint64_t acceptance_ball_size(std::uint16_t rho, std::uint32_t n);

/// Counts accepting templates by trying all 2^n (n <= 24).
std::uint64_t exhaustive_acceptance_count(const Commitment& c);

/// Reduced-size instance with an n_small-bit template committed under
/// repetition factor rho, attacked with uniform random templates.
struct BruteForceTarget {
  Commitment commitment;
  BitString enrolled;
};

BruteForceTarget make_brute_force_target(std::uint32_t n_small, std::uint16_t rho, std::uint64_t seed);

/// Trial i draws its template from CounterRng(seed).split(i).
AttackOutcome brute_force_sim(const Commitment& target, std::uint64_t trials, std::uint64_t seed,
                              unsigned threads = 0);
AttackOutcome brute_force_sim(std::uint32_t n_small, std::uint16_t rho, std::uint64_t trials, std::uint64_t seed,
                              unsigned threads = 0);

enum class OracleAccess {
  none,   // helper data only: guess a key, submit codeword ^ helper
  model,  // projection seed and discriminants: invert sign(Wx + b) = y
};

/// Attacks a stolen serialized record. With model access each trial picks a
/// random bit string y, solves the minimum-norm least-squares system
/// W x = (2y - 1) - b, lifts x back to feature space and authenticates it.
AttackOutcome affine_attack_sim(std::span<const std::uint8_t> stolen_record, OracleAccess access,
                                std::uint64_t trials, std::uint64_t seed);

/// Outside the stored-record threat model: the attacker holds the enrolled
/// binary template itself.
AttackOutcome leaked_template_attack(std::span<const std::uint8_t> stolen_record, const BitString& leaked);

}  // namespace bioprot
