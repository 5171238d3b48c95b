#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bioprot/ingest.hpp"
#include "bioprot/pipeline.hpp"

namespace bioprot {

// ---------------------------------------------------------------- run config

struct DatasetSource {
  enum class Kind { synthetic, csv, images };
  Kind kind = Kind::synthetic;
  SyntheticSpec synthetic;
  std::filesystem::path path;
  std::size_t width = 0;
  std::size_t height = 0;
  std::string name;
};

/// "synthetic:k=10,r=5,l=256,sigma_within=0.1,sigma_between=1,seed=7",
/// "csv:PATH" or "images:PATH:WxH". A leading "NAME=" sets the report name.
DatasetSource parse_dataset_source(std::string_view spec);
Dataset load_dataset(const DatasetSource& source);

struct RunConfig {
  SystemConfig system;
  std::optional<std::uint64_t> seed;
  std::string store;
  std::string output;
  bool eval_mode = false;
  std::vector<DatasetSource> datasets;
  std::size_t repetitions = 5;
  std::size_t impostors_per_user = 0;  // 0: one probe per other user
};

/// Applies one key = value setting; unknown keys are a parse error.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);
/// Flat "key = value" lines, '#' comments.
RunConfig parse_run_config(std::string_view text, const std::string& name, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

// ---------------------------------------------------------------- evaluation

struct StageScore {
  std::string stage;
  double genuine_mean = 0.0;
  double impostor_mean = 0.0;
  std::size_t genuine_count = 0;
  std::size_t impostor_count = 0;
  std::size_t count() const noexcept { return genuine_count + impostor_count; }
  double margin() const noexcept { return genuine_mean - impostor_mean; }
};

struct EvalOptions {
  SystemConfig config;
  std::uint64_t seed = 1;
  /// Full-stage impostor probes per (fold, user); 0 means k - 1.
  std::size_t impostors_per_user = 0;
  unsigned threads = 0;
};

struct EvalReport {
  std::string dataset;
  /// feature_vector, cancelable, binary, full.
  std::vector<StageScore> stages;
  /// bda and threshold binary-stage scores.
  std::vector<StageScore> binarizers;
  std::size_t genuine_trials = 0;
  std::size_t genuine_accepts = 0;
  std::size_t impostor_trials = 0;
  std::size_t impostor_accepts = 0;

  double frr() const noexcept;
  double far() const noexcept;
  const StageScore& stage(std::string_view name) const;
  const StageScore& binarizer(std::string_view name) const;
};

/// Leave-one-out over sample index: fold f enrolls every class on all
/// samples but f and probes with sample f. Genuine scores compare a probe
/// with its own user's reference, impostor scores compare another user's
/// probe (through that user's own transform) with the reference; the full
/// stage submits impostor probes to the claimed user's record.
EvalReport run_eval(const Dataset& dataset, const EvalOptions& options);

/// Header "stage,genuine_mean,impostor_mean,count".
void write_stage_csv(const EvalReport& report, std::ostream& out);
/// Header "binarizer,genuine_mean,impostor_mean,margin,count".
void write_binarizer_csv(const EvalReport& report, std::ostream& out);
void write_eval_text(const EvalReport& report, std::ostream& out);

struct StageRow {
  std::string stage;
  double genuine_mean = 0.0;
  double impostor_mean = 0.0;
  std::size_t count = 0;
};
std::vector<StageRow> parse_stage_csv(std::string_view text);

// ---------------------------------------------------------------- timing

struct TimingRow {
  std::string dataset;
  double mean_ms = 0.0;
  double stddev_ms = 0.0;
  std::size_t count = 0;
};

struct BenchOptions {
  SystemConfig config;
  std::uint64_t seed = 1;
  std::size_t repetitions = 5;
  unsigned threads = 0;
};

/// Enrolls every class on all but its last sample, then times
/// authenticate() on the last sample `repetitions` times per user.
TimingRow run_bench(const Dataset& dataset, const std::string& name, const BenchOptions& options);

/// Header "dataset,mean_ms,stddev_ms,count".
void write_timing_csv(const std::vector<TimingRow>& rows, std::ostream& out);
void write_timing_text(const std::vector<TimingRow>& rows, std::ostream& out);
std::vector<TimingRow> parse_timing_csv(std::string_view text);

}  // namespace bioprot
