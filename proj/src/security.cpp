#include "bioprot/security.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <thread>

#include "bioprot/error.hpp"
#include "bioprot/rng.hpp"

namespace bioprot {

namespace {

std::string canonical_stage(std::string_view name) {
  if (name == "rp" || name == "random_projection") return "random_projection";
  if (name == "bda") return "bda";
  if (name == "fc" || name == "fuzzy_commitment") return "fuzzy_commitment";
  if (name == "full") return "full";
  if (name == "hybrid_full") return "hybrid_full";
  fail(ErrorKind::parse, "unknown stage '" + std::string(name) + "'");
}

std::uint64_t parse_u64(std::string_view text, const std::string& what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) fail(ErrorKind::parse, what + ": not an integer");
  return v;
}

}  // namespace

std::vector<KcOverride> parse_kc_overrides(std::string_view text) {
  std::vector<KcOverride> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) fail(ErrorKind::parse, "override '" + std::string(item) + "' lacks '='");
    const std::uint64_t kc = parse_u64(item.substr(eq + 1), "override '" + std::string(item) + "'");
    if (kc == 0) fail(ErrorKind::parse, "Kc must be at least 1");
    out.push_back({canonical_stage(item.substr(0, eq)), kc});
  }
  return out;
}

std::vector<KcOverride> published_kc() {
  return {{"random_projection", 3772}, {"fuzzy_commitment", 11340}, {"hybrid_full", 6810}, {"full", 6800}};
}

StageStrength stage_strength(std::string stage, std::uint64_t kc) {
  if (kc == 0) fail(ErrorKind::domain, "stage length must be positive");
  return {std::move(stage), kc, kc - 1, kc};
}

SecurityReport strength_report(const SystemConfig& config, std::span<const KcOverride> overrides) {
  config.validate();
  SecurityReport report;
  report.stages.push_back(stage_strength("random_projection", static_cast<std::uint64_t>(config.l_r) * 64));
  report.stages.push_back(stage_strength("bda", config.n));
  report.stages.push_back(stage_strength("fuzzy_commitment", config.n));
  report.stages.push_back(stage_strength("full", config.n / config.rho));
  for (const auto& o : overrides) {
    auto it = std::find_if(report.stages.begin(), report.stages.end(),
                           [&](const StageStrength& s) { return s.stage == o.stage; });
    if (it == report.stages.end()) {
      report.stages.push_back(stage_strength(o.stage, o.kc));
    } else {
      *it = stage_strength(o.stage, o.kc);
    }
  }
  const auto weakest = std::min_element(report.stages.begin(), report.stages.end(),
                                        [](const auto& a, const auto& b) { return a.strength_bits < b.strength_bits; });
  report.weakest_stage = weakest->stage;
  report.overall_bits = weakest->strength_bits;
  const double per_symbol = std::log2(static_cast<double>(report.charset.alphabet));
  report.charset.length = static_cast<std::uint64_t>(std::ceil(static_cast<double>(report.overall_bits) / per_symbol));
  report.charset.space_log2 = static_cast<double>(report.charset.length) * per_symbol;
  return report;
}

SecurityReport strength_report(const EnrollmentRecord& record, std::span<const KcOverride> overrides) {
  SystemConfig c = record.config;
  c.n = record.commitment.helper.size();
  return strength_report(c, overrides);
}

void write_report_text(const SecurityReport& report, std::ostream& out) {
  out << std::left << std::setw(20) << "stage" << std::right << std::setw(10) << "Kc" << std::setw(16)
      << "strength_bits" << '\n';
  for (const auto& s : report.stages) {
    out << std::left << std::setw(20) << s.stage << std::right << std::setw(10) << s.kc << std::setw(16)
        << s.strength_bits << '\n';
  }
  out << "overall: " << report.overall_bits << " bits (" << report.weakest_stage << ")\n";
  out << "equivalent password: " << report.charset.length << " symbols over a " << report.charset.alphabet
      << "-symbol alphabet (log2 space " << std::fixed << std::setprecision(2) << report.charset.space_log2
      << ")\n";
  out << std::defaultfloat;
}

void write_report_csv(const SecurityReport& report, std::ostream& out) {
  out << "stage,Kc,strength_bits\n";
  for (const auto& s : report.stages) out << s.stage << ',' << s.kc << ',' << s.strength_bits << '\n';
}

std::vector<StageStrength> parse_report_csv(std::string_view text) {
  std::vector<StageStrength> rows;
  bool header = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    if (header) {
      if (line != "stage,Kc,strength_bits") fail(ErrorKind::parse, "unexpected security report header");
      header = false;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string_view::npos ? c1 : c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos) fail(ErrorKind::parse, "malformed report row");
    StageStrength s;
    s.stage = std::string(line.substr(0, c1));
    s.kc = parse_u64(line.substr(c1 + 1, c2 - c1 - 1), "Kc");
    s.strength_bits = parse_u64(line.substr(c2 + 1), "strength_bits");
    s.guess_space_log2 = s.kc;
    rows.push_back(std::move(s));
  }
  if (header) fail(ErrorKind::parse, "empty security report");
  return rows;
}

// ---------------------------------------------------------------- attacks

AttackOutcome make_outcome(std::string attack, std::uint64_t trials, std::uint64_t successes, double theoretical) {
  AttackOutcome o;
  o.attack = std::move(attack);
  o.trials = trials;
  o.successes = successes;
  o.empirical_rate = static_cast<double>(successes) / static_cast<double>(trials);
  o.theoretical_rate = theoretical;
  const double sigma = std::sqrt(theoretical * (1.0 - theoretical) / static_cast<double>(trials));
  o.consistent = std::abs(o.empirical_rate - theoretical) <= 3.0 * sigma;
  return o;
}

std::uint64_t acceptance_ball_size(std::uint16_t rho, std::uint32_t n) {
  const EccCodec codec = EccCodec::repetition(rho, n);
  std::uint64_t ball = 0;
  std::uint64_t binom = 1;  // C(rho, e)
  for (std::size_t e = 0; e <= codec.correction_radius(); ++e) {
    ball += binom;
    binom = binom * (rho - e) / (e + 1);
  }
  std::uint64_t total = 1;
  for (std::size_t b = 0; b < codec.message_bits(); ++b) {
    if (total > std::numeric_limits<std::uint64_t>::max() / ball) {
      fail(ErrorKind::budget, "acceptance ball does not fit in 64 bits");
    }
    total *= ball;
  }
  return total;
}

std::uint64_t exhaustive_acceptance_count(const Commitment& c) {
  const std::uint32_t n = c.codec.n;
  if (n > 24) fail(ErrorKind::budget, "exhaustive enumeration limited to 24 bits");
  std::uint64_t accepted = 0;
  BitString candidate(n);
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << n); ++v) {
    for (std::uint32_t i = 0; i < n; ++i) candidate.set(i, (v >> i) & 1U);
    if (verify_commitment(candidate, c).accepted) ++accepted;
  }
  return accepted;
}

BruteForceTarget make_brute_force_target(std::uint32_t n_small, std::uint16_t rho, std::uint64_t seed) {
  if (n_small > 24) fail(ErrorKind::budget, "n_small above 24 cannot be calibrated by simulation");
  const EccCodec codec = EccCodec::repetition(rho, n_small);
  const CounterRng rng = CounterRng(seed).split("target");
  BitString enrolled(n_small);
  for (std::uint32_t i = 0; i < n_small; ++i) enrolled.set(i, rng.at(i) & 1U);
  return {commit(enrolled, codec, rng.at(n_small)), enrolled};
}

namespace {

/// Runs `trial(i)` for i in [0, trials) over worker threads and counts
/// successes. Per-trial randomness must depend on i only.
template <class Trial>
std::uint64_t run_trials(std::uint64_t trials, unsigned threads, const Trial& trial) {
  unsigned count = threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : threads;
  count = static_cast<unsigned>(std::min<std::uint64_t>(count, std::max<std::uint64_t>(trials, 1)));
  std::atomic<std::uint64_t> successes{0};
  const auto work = [&](unsigned w) {
    std::uint64_t local = 0;
    for (std::uint64_t i = w; i < trials; i += count) local += trial(i) ? 1 : 0;
    successes += local;
  };
  if (count == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < count; ++w) pool.emplace_back(work, w);
  }
  return successes.load();
}

}  // namespace

AttackOutcome brute_force_sim(const Commitment& target, std::uint64_t trials, std::uint64_t seed, unsigned threads) {
  if (trials == 0) fail(ErrorKind::domain, "trials must be positive");
  const std::uint32_t n = target.codec.n;
  if (n > 24) fail(ErrorKind::budget, "n_small above 24 cannot be calibrated by simulation");
  const double p = static_cast<double>(acceptance_ball_size(target.codec.rho, n)) /
                   static_cast<double>(std::uint64_t{1} << n);
  const CounterRng root(seed);
  const std::uint64_t hits = run_trials(trials, threads, [&](std::uint64_t i) {
    const CounterRng rng = root.split(i);
    BitString guess(n);
    const std::uint64_t word = rng.at(0);
    for (std::uint32_t b = 0; b < n; ++b) guess.set(b, (word >> b) & 1U);
    return verify_commitment(guess, target).accepted;
  });
  return make_outcome("brute_force", trials, hits, p);
}

AttackOutcome brute_force_sim(std::uint32_t n_small, std::uint16_t rho, std::uint64_t trials, std::uint64_t seed,
                              unsigned threads) {
  if (trials == 0) fail(ErrorKind::domain, "trials must be positive");
  return brute_force_sim(make_brute_force_target(n_small, rho, seed).commitment, trials, seed, threads);
}

AttackOutcome affine_attack_sim(std::span<const std::uint8_t> stolen_record, OracleAccess access,
                                std::uint64_t trials, std::uint64_t seed) {
  if (trials == 0) fail(ErrorKind::domain, "trials must be positive");
  const EnrollmentRecord record = deserialize_record(stolen_record);
  const Commitment& c = record.commitment;
  const CounterRng root(seed);

  if (access == OracleAccess::none) {
    const std::size_t k = c.codec.message_bits();
    const double p = std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(k, 1000)));
    const std::uint64_t hits = run_trials(trials, 1, [&](std::uint64_t i) {
      const CounterRng rng = root.split(i);
      BitString key(k);
      for (std::size_t b = 0; b < k; ++b) key.set(b, (rng.at(b / 64) >> (b % 64)) & 1U);
      return verify_commitment(ecc_encode(key, c.codec) ^ c.helper, c).accepted;
    });
    return make_outcome("helper_only", trials, hits, p);
  }

  const BDAModel& model = record.model;
  const std::size_t n = model.bits();
  const std::size_t dim = model.dimension();
  Eigen::MatrixXd w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t d = 0; d < dim; ++d) w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(d)) = model.weights()(j, d);
  }
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> solver(w);
  const ProjectionMatrix projection = regenerate_projection(record);

  // Theoretical rate assumes the realized template is uniform over {0,1}^n.
  double p = 0.0;
  if (n <= 62) {
    p = static_cast<double>(acceptance_ball_size(c.codec.rho, c.codec.n)) / std::ldexp(1.0, static_cast<int>(n));
  }
  const std::uint64_t hits = run_trials(trials, 1, [&](std::uint64_t i) {
    const CounterRng rng = root.split(i);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      const bool bit = (rng.at(j / 64) >> (j % 64)) & 1U;
      rhs(static_cast<Eigen::Index>(j)) = (bit ? 1.0 : -1.0) - model.biases()[j];
    }
    const Eigen::VectorXd x = solver.solve(rhs);
    const std::vector<double> y(x.data(), x.data() + x.size());
    return authenticate(FeatureVector(lift(y, projection)), record).accepted;
  });
  return make_outcome("affine_least_squares", trials, hits, p);
}

AttackOutcome leaked_template_attack(std::span<const std::uint8_t> stolen_record, const BitString& leaked) {
  const EnrollmentRecord record = deserialize_record(stolen_record);
  const bool ok = verify_commitment(leaked, record.commitment).accepted;
  return make_outcome("leaked_template", 1, ok ? 1 : 0, 1.0);
}

}  // namespace bioprot
