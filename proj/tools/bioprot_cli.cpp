// bioprot: enroll / verify / revoke against a template store, plus the
// evaluation, timing and security reports.

#include <CLI11.hpp>

#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "bioprot/error.hpp"
#include "bioprot/eval.hpp"
#include "bioprot/ingest.hpp"
#include "bioprot/pipeline.hpp"
#include "bioprot/security.hpp"

namespace fs = std::filesystem;
using namespace bioprot;

namespace {

// Exit codes. Reject is never an error.
constexpr int exit_ok = 0;
constexpr int exit_reject = 1;
constexpr int exit_usage = 2;  // also unknown user / revoked record
constexpr int exit_input = 3;
constexpr int exit_integrity = 4;
constexpr int exit_policy = 5;
constexpr int exit_io = 6;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::not_found: return exit_usage;
    case ErrorKind::integrity: return exit_integrity;
    case ErrorKind::policy: return exit_policy;
    default: return exit_input;
  }
}

struct Globals {
  std::string store;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output;
  bool eval_mode = false;
  std::vector<std::string> settings;
  unsigned threads = 0;
};

RunConfig resolve(const Globals& g) {
  RunConfig rc;
  if (!g.config.empty()) rc = load_run_config(g.config);
  for (const auto& s : g.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(ErrorKind::parse, "--set expects KEY=VALUE, got '" + s + "'");
    apply_setting(rc, std::string_view(s).substr(0, eq), std::string_view(s).substr(eq + 1));
  }
  if (g.seed) rc.seed = g.seed;
  if (!g.store.empty()) rc.store = g.store;
  if (!g.output.empty()) rc.output = g.output;
  if (g.eval_mode) rc.eval_mode = true;
  rc.system.validate();
  return rc;
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

const std::string& require_store(const RunConfig& rc) {
  if (rc.store.empty()) fail(ErrorKind::parse, "no template store: pass --store PATH or set store in the config");
  return rc.store;
}

// Samples from a data source. A bare path is read as a feature CSV.
std::vector<FeatureVector> select_samples(const std::string& source, const std::string& label) {
  const DatasetSource src = parse_dataset_source(source.find(':') == std::string::npos ? "csv:" + source : source);
  const Dataset ds = load_dataset(src);
  if (label.empty()) {
    if (ds.class_count() != 1) {
      fail(ErrorKind::parse, source + " holds " + std::to_string(ds.class_count()) + " classes; pick one with --class");
    }
    return ds.classes.front().samples;
  }
  for (const auto& c : ds.classes) {
    if (c.label == label) return c.samples;
  }
  fail(ErrorKind::not_found, "no class '" + label + "' in " + source);
}

std::ofstream open_output(const fs::path& dir, const std::string& file) {
  fs::create_directories(dir);
  std::ofstream out(dir / file);
  if (!out) fail(ErrorKind::parse, "cannot write " + (dir / file).string());
  return out;
}

std::string hex_bits(const BitString& b) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  for (std::uint8_t byte : b.bytes()) {
    s += digits[byte >> 4];
    s += digits[byte & 15];
  }
  return s;
}

std::vector<DatasetSource> datasets_for(const RunConfig& rc, const std::vector<std::string>& cli) {
  std::vector<DatasetSource> out;
  for (const auto& s : cli) out.push_back(parse_dataset_source(s));
  if (out.empty()) out = rc.datasets;
  if (out.empty()) {
    DatasetSource d;
    d.synthetic.length = rc.system.l;
    d.name = "synthetic";
    out.push_back(d);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Protected face-template enrollment, verification and evaluation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--store", g.store, "Template store directory");
  app.add_option("--config", g.config, "key = value configuration file");
  app.add_option("--seed", g.seed, "Master seed (default: operating-system entropy)");
  app.add_option("--output", g.output, "Directory for report files");
  app.add_flag("--eval-mode", g.eval_mode, "Print per-stage diagnostics");
  app.add_option("--set", g.settings, "Override one configuration key (KEY=VALUE)");
  app.add_option("--threads", g.threads, "Worker threads (0: one per core)");

  std::string user, source, label, reissue;
  std::size_t index = 0;

  auto* enroll_cmd = app.add_subcommand("enroll", "Enroll a user from a sample file");
  enroll_cmd->add_option("user", user)->required();
  enroll_cmd->add_option("samples", source, "Feature CSV or data source")->required();
  enroll_cmd->add_option("--class", label, "Class label inside the sample file");

  auto* verify_cmd = app.add_subcommand("verify", "Authenticate one probe against a user");
  verify_cmd->add_option("user", user)->required();
  verify_cmd->add_option("probe", source, "Feature CSV or data source")->required();
  verify_cmd->add_option("--class", label, "Class label inside the probe file");
  verify_cmd->add_option("--index", index, "Sample index within the class");

  auto* revoke_cmd = app.add_subcommand("revoke", "Revoke a user's record, optionally reissuing it");
  revoke_cmd->add_option("user", user)->required();
  revoke_cmd->add_option("--reissue", reissue, "Re-enroll from this sample file under a new seed");
  revoke_cmd->add_option("--class", label, "Class label inside the reissue file");

  std::vector<std::string> dataset_args;
  std::optional<std::size_t> repetitions, impostors;

  auto* eval_cmd = app.add_subcommand("eval", "Per-stage matching scores and binarizer comparison");
  eval_cmd->add_option("--dataset", dataset_args, "Data source (repeatable)");
  eval_cmd->add_option("--impostors", impostors, "Full-stage impostor probes per user and fold");

  auto* bench_cmd = app.add_subcommand("bench", "Verification timing per dataset");
  bench_cmd->add_option("--dataset", dataset_args, "Data source (repeatable)");
  bench_cmd->add_option("--repetitions", repetitions, "Timed verifications per user (>= 3)");

  std::string paper_kc;
  bool csv = false;
  auto* security_cmd = app.add_subcommand("security", "Brute-force strength report");
  auto* paper_opt = security_cmd->add_option("--paper-kc", paper_kc, "Kc overrides, e.g. rp=3772 (empty: published rows)")
                        ->expected(0, 1);
  security_cmd->add_option("--record", user, "Report on a stored user's record");
  security_cmd->add_flag("--csv", csv, "Print CSV instead of the table");

  std::string gen_spec, gen_out;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic dataset as feature CSV");
  gen_cmd->add_option("--spec", gen_spec, "k=..,r=..,l=..,sigma_within=..,sigma_between=..,seed=..");
  gen_cmd->add_option("--out", gen_out, "Output file (default: stdout)");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_usage;
  }

  try {
    const RunConfig rc = resolve(g);

    if (*enroll_cmd) {
      validate_user_id(user);
      TemplateStore store(require_store(rc));
      const auto samples = select_samples(source, label);
      const std::uint64_t master = rc.seed.value_or(entropy_seed());
      const auto record = enroll(user, samples, rc.system, master, {std::time(nullptr), g.threads});
      const std::string file = store.put(record);
      std::cout << "ENROLLED " << user << " " << file << "\n";
      return exit_ok;
    }

    if (*verify_cmd) {
      validate_user_id(user);
      const TemplateStore store(require_store(rc));
      const auto record = store.get(user);
      const auto samples = select_samples(source, label);
      if (index >= samples.size()) {
        fail(ErrorKind::not_found, "sample index " + std::to_string(index) + " out of range");
      }
      const auto mode = rc.eval_mode ? AuthMode::evaluation : AuthMode::operational;
      const AuthDecision d = authenticate(samples[index], record, mode);
      if (d.diagnostics) {
        const auto& diag = *d.diagnostics;
        std::cerr << "cancelable_norm " << norm(diag.cancelable.values()) << "\n"
                  << "binary " << hex_bits(diag.binary) << "\n"
                  << "corrected_errors "
                  << (diag.corrected_errors ? std::to_string(*diag.corrected_errors) : std::string("-")) << "\n";
      }
      std::cout << (d.accepted ? "ACCEPT" : "REJECT") << "\n";
      return d.accepted ? exit_ok : exit_reject;
    }

    if (*revoke_cmd) {
      validate_user_id(user);
      TemplateStore store(require_store(rc));
      if (reissue.empty()) {
        store.revoke(user);
        std::cout << "REVOKED " << user << "\n";
        return exit_ok;
      }
      const auto old = store.get(user);
      const auto samples = select_samples(reissue, label);
      const std::uint64_t master = rc.seed.value_or(entropy_seed());
      const auto fresh = revoke_reissue(old, master, samples, {std::time(nullptr), g.threads});
      const std::string file = store.put(fresh);
      std::cout << "REISSUED " << user << " " << file << "\n";
      return exit_ok;
    }

    if (*eval_cmd) {
      const std::uint64_t seed = rc.seed.value_or(1);
      for (const auto& src : datasets_for(rc, dataset_args)) {
        Dataset ds = load_dataset(src);
        ds.provenance = src.name;
        const EvalReport report =
            run_eval(ds, {rc.system, seed, impostors.value_or(rc.impostors_per_user), g.threads});
        write_eval_text(report, std::cout);
        if (!rc.output.empty()) {
          auto stages = open_output(rc.output, src.name + "_stages.csv");
          write_stage_csv(report, stages);
          auto bins = open_output(rc.output, src.name + "_binarizers.csv");
          write_binarizer_csv(report, bins);
          auto text = open_output(rc.output, src.name + "_eval.txt");
          write_eval_text(report, text);
        } else {
          std::cout << "\n";
          write_stage_csv(report, std::cout);
          std::cout << "\n";
          write_binarizer_csv(report, std::cout);
        }
      }
      return exit_ok;
    }

    if (*bench_cmd) {
      const std::uint64_t seed = rc.seed.value_or(1);
      std::vector<TimingRow> rows;
      for (const auto& src : datasets_for(rc, dataset_args)) {
        const Dataset ds = load_dataset(src);
        rows.push_back(run_bench(ds, src.name, {rc.system, seed, repetitions.value_or(rc.repetitions), g.threads}));
      }
      write_timing_text(rows, std::cout);
      if (!rc.output.empty()) {
        auto out = open_output(rc.output, "timing.csv");
        write_timing_csv(rows, out);
        auto text = open_output(rc.output, "timing.txt");
        write_timing_text(rows, text);
      } else {
        std::cout << "\n";
        write_timing_csv(rows, std::cout);
      }
      return exit_ok;
    }

    if (*security_cmd) {
      std::vector<KcOverride> overrides;
      if (paper_opt->count() > 0) overrides = paper_kc.empty() ? published_kc() : parse_kc_overrides(paper_kc);
      SecurityReport report;
      if (!user.empty()) {
        validate_user_id(user);
        report = strength_report(TemplateStore(require_store(rc)).get(user), overrides);
      } else {
        report = strength_report(rc.system, overrides);
      }
      if (csv) write_report_csv(report, std::cout);
      else write_report_text(report, std::cout);
      if (!rc.output.empty()) {
        auto out = open_output(rc.output, "security.csv");
        write_report_csv(report, out);
        auto text = open_output(rc.output, "security.txt");
        write_report_text(report, text);
      }
      return exit_ok;
    }

    if (*gen_cmd) {
      DatasetSource src = parse_dataset_source("synthetic:" + gen_spec);
      if (rc.seed && gen_spec.find("seed=") == std::string::npos) src.synthetic.seed = *rc.seed;
      const Dataset ds = generate_synthetic(src.synthetic);
      if (gen_out.empty()) {
        write_feature_csv(ds, std::cout);
      } else {
        std::ofstream out(gen_out);
        if (!out) fail(ErrorKind::parse, "cannot write " + gen_out);
        write_feature_csv(ds, out);
        std::cerr << "wrote " << ds.total_samples() << " samples to " << gen_out << "\n";
      }
      return exit_ok;
    }
  } catch (const RevokedError& e) {
    std::cerr << "revoked: " << e.what() << "\n";
    return exit_usage;
  } catch (const Error& e) {
    std::cerr << to_string(e.kind()) << " error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_io;
  }
  return exit_usage;
}
