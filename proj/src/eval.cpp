#include "bioprot/eval.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <sstream>

#include "bioprot/error.hpp"
#include "bioprot/rng.hpp"

namespace bioprot {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(std::string_view text, std::string_view key) {
  text = trim(text);
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    fail(ErrorKind::parse, "bad value '" + std::string(text) + "' for " + std::string(key));
  }
  return v;
}

bool parse_bool(std::string_view text, std::string_view key) {
  text = trim(text);
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  fail(ErrorKind::parse, "bad boolean '" + std::string(text) + "' for " + std::string(key));
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

// ---------------------------------------------------------------- run config

DatasetSource parse_dataset_source(std::string_view spec) {
  DatasetSource src;
  spec = trim(spec);
  if (const auto eq = spec.find('='), colon = spec.find(':'); eq != std::string_view::npos && eq < colon) {
    src.name = std::string(spec.substr(0, eq));
    spec = spec.substr(eq + 1);
  }
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) fail(ErrorKind::parse, "dataset source needs a kind prefix: " + std::string(spec));
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view rest = spec.substr(colon + 1);
  if (kind == "synthetic") {
    src.kind = DatasetSource::Kind::synthetic;
    std::string_view params = rest;
    while (!params.empty()) {
      const auto comma = params.find(',');
      const std::string_view item = trim(params.substr(0, comma));
      params = comma == std::string_view::npos ? std::string_view{} : params.substr(comma + 1);
      if (item.empty()) continue;
      const auto e = item.find('=');
      if (e == std::string_view::npos) fail(ErrorKind::parse, "synthetic parameter lacks '=': " + std::string(item));
      const auto key = item.substr(0, e);
      const auto value = item.substr(e + 1);
      auto& s = src.synthetic;
      if (key == "k") s.classes = parse_number<std::size_t>(value, key);
      else if (key == "r") s.samples_per_class = parse_number<std::size_t>(value, key);
      else if (key == "l") s.length = parse_number<std::size_t>(value, key);
      else if (key == "sigma_within") s.sigma_within = parse_number<double>(value, key);
      else if (key == "sigma_between") s.sigma_between = parse_number<double>(value, key);
      else if (key == "seed") s.seed = parse_number<std::uint64_t>(value, key);
      else fail(ErrorKind::parse, "unknown synthetic parameter '" + std::string(key) + "'");
    }
    src.synthetic.validate();
    if (src.name.empty()) src.name = "synthetic-" + std::to_string(src.synthetic.seed);
  } else if (kind == "csv") {
    src.kind = DatasetSource::Kind::csv;
    src.path = std::string(rest);
    if (src.name.empty()) src.name = src.path.stem().string();
  } else if (kind == "images") {
    src.kind = DatasetSource::Kind::images;
    const auto last = rest.rfind(':');
    if (last == std::string_view::npos) fail(ErrorKind::parse, "image source needs :WxH");
    const auto size = rest.substr(last + 1);
    const auto x = size.find('x');
    if (x == std::string_view::npos) fail(ErrorKind::parse, "image size must be WxH");
    src.width = parse_number<std::size_t>(size.substr(0, x), "width");
    src.height = parse_number<std::size_t>(size.substr(x + 1), "height");
    src.path = std::string(rest.substr(0, last));
    if (src.name.empty()) src.name = src.path.filename().string();
  } else {
    fail(ErrorKind::parse, "unknown dataset kind '" + std::string(kind) + "'");
  }
  return src;
}

Dataset load_dataset(const DatasetSource& source) {
  switch (source.kind) {
    case DatasetSource::Kind::synthetic: return generate_synthetic(source.synthetic);
    case DatasetSource::Kind::csv: return load_feature_csv(source.path);
    case DatasetSource::Kind::images: return load_image_dir(source.path, source.width, source.height);
  }
  fail(ErrorKind::domain, "unknown dataset kind");
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  SystemConfig& s = config.system;
  if (key == "l") s.l = parse_number<std::size_t>(value, key);
  else if (key == "l_r") s.l_r = parse_number<std::size_t>(value, key);
  else if (key == "n") s.n = parse_number<std::size_t>(value, key);
  else if (key == "rho") s.rho = parse_number<std::uint16_t>(value, key);
  else if (key == "d_min") s.d_min = parse_number<std::size_t>(value, key);
  else if (key == "max_epochs") s.max_epochs = parse_number<std::size_t>(value, key);
  else if (key == "learning_rate") s.learning_rate = parse_number<double>(value, key);
  else if (key == "margin") s.margin = parse_number<double>(value, key);
  else if (key == "cohort_classes") s.cohort_classes = parse_number<std::size_t>(value, key);
  else if (key == "hash") s.hash = std::string(value);
  else if (key == "mode") {
    if (value == "per_user") s.mode = TrainingMode::per_user;
    else if (value == "multi_class") s.mode = TrainingMode::multi_class;
    else fail(ErrorKind::parse, "mode must be per_user or multi_class");
  } else if (key == "reference") {
    if (value == "majority") s.reference = ReferenceRule::majority;
    else if (value == "first") s.reference = ReferenceRule::first;
    else fail(ErrorKind::parse, "reference must be majority or first");
  } else if (key == "seed") config.seed = parse_number<std::uint64_t>(value, key);
  else if (key == "store") config.store = std::string(value);
  else if (key == "output") config.output = std::string(value);
  else if (key == "eval_mode") config.eval_mode = parse_bool(value, key);
  else if (key == "dataset") config.datasets.push_back(parse_dataset_source(value));
  else if (key == "repetitions") config.repetitions = parse_number<std::size_t>(value, key);
  else if (key == "impostors_per_user") config.impostors_per_user = parse_number<std::size_t>(value, key);
  else fail(ErrorKind::parse, "unknown configuration key '" + std::string(key) + "'");
}

RunConfig parse_run_config(std::string_view text, const std::string& name, RunConfig base) {
  std::size_t row = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++row;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(ErrorKind::parse, name + ": line " + std::to_string(row) + " lacks '='");
    try {
      apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      fail(e.kind(), name + ": line " + std::to_string(row) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::parse, "cannot read config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_run_config(text, path.string(), std::move(base));
}

// ---------------------------------------------------------------- evaluation

double EvalReport::frr() const noexcept {
  return genuine_trials == 0 ? 0.0 : 1.0 - static_cast<double>(genuine_accepts) / static_cast<double>(genuine_trials);
}

double EvalReport::far() const noexcept {
  return impostor_trials == 0 ? 0.0 : static_cast<double>(impostor_accepts) / static_cast<double>(impostor_trials);
}

const StageScore& EvalReport::stage(std::string_view name) const {
  for (const auto& s : stages) {
    if (s.stage == name) return s;
  }
  fail(ErrorKind::not_found, "no stage " + std::string(name));
}

const StageScore& EvalReport::binarizer(std::string_view name) const {
  for (const auto& s : binarizers) {
    if (s.stage == name) return s;
  }
  fail(ErrorKind::not_found, "no binarizer " + std::string(name));
}

namespace {

std::vector<double> mean_vector(const std::vector<std::span<const double>>& rows) {
  std::vector<double> m(rows.front().size(), 0.0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += r[i];
  }
  for (double& x : m) x /= static_cast<double>(rows.size());
  return m;
}

struct ScoreAccumulator {
  std::vector<double> genuine;
  std::vector<double> impostor;
  StageScore finish(std::string name) const {
    return {std::move(name), mean_of(genuine), mean_of(impostor), genuine.size(), impostor.size()};
  }
};

}  // namespace

EvalReport run_eval(const Dataset& dataset, const EvalOptions& options) {
  dataset.validate();
  const SystemConfig& config = options.config;
  config.validate();
  const std::size_t k = dataset.class_count();
  const std::size_t r = dataset.min_samples();
  if (k < 2 || r < 3) {
    // r - 1 >= 2 enrollment samples per fold.
    fail(ErrorKind::structural, "evaluation needs at least 2 classes with 3 samples each");
  }
  if (dataset.length != config.l) {
    fail(ErrorKind::dimension, "dataset length " + std::to_string(dataset.length) + " differs from l = " +
                                   std::to_string(config.l));
  }
  const bool baseline = config.n <= config.l_r;
  const std::size_t impostors = options.impostors_per_user == 0 ? k - 1 : options.impostors_per_user;
  const CounterRng user_seeds = CounterRng(options.seed).split("users");

  ScoreAccumulator feature, cancel, binary, full, bda, threshold;
  EvalReport report;
  report.dataset = dataset.provenance;

  for (std::size_t fold = 0; fold < r; ++fold) {
    std::vector<UserSamples> users(k);
    for (std::size_t u = 0; u < k; ++u) {
      char id[32];
      std::snprintf(id, sizeof id, "u%04zu", u);
      users[u].user_id = id;
      users[u].master_seed = user_seeds.at(u);
      for (std::size_t s = 0; s < r; ++s) {
        if (s != fold) users[u].samples.push_back(dataset.classes[u].samples[s]);
      }
    }
    const auto records = enroll_group(users, config, options.seed, {0, options.threads});

    // Per-user stage outputs through the user's own parameters.
    std::vector<std::vector<double>> feat_ref(k), cancel_ref(k);
    std::vector<BitString> bin_ref(k), thr_ref(k), bin_probe(k), thr_probe(k);
    std::vector<CancelableTemplate> cancel_probe(k);
    for (std::size_t u = 0; u < k; ++u) {
      const ProjectionMatrix p = regenerate_projection(records[u]);
      std::vector<std::span<const double>> raw;
      std::vector<CancelableTemplate> projected;
      for (const auto& s : users[u].samples) {
        raw.push_back(s.values());
        projected.push_back(project(s, p));
      }
      feat_ref[u] = mean_vector(raw);
      std::vector<std::span<const double>> proj_rows;
      std::vector<BitString> bins, thrs;
      for (const auto& t : projected) {
        proj_rows.push_back(t.values());
        bins.push_back(binarize(t, records[u].model));
        if (baseline) thrs.push_back(threshold_binarize(t, config.n));
      }
      cancel_ref[u] = mean_vector(proj_rows);
      bin_ref[u] = majority_vote(bins);
      cancel_probe[u] = project(dataset.classes[u].samples[fold], p);
      bin_probe[u] = binarize(cancel_probe[u], records[u].model);
      if (baseline) {
        thr_ref[u] = majority_vote(thrs);
        thr_probe[u] = threshold_binarize(cancel_probe[u], config.n);
      }
    }

    for (std::size_t u = 0; u < k; ++u) {
      for (std::size_t v = 0; v < k; ++v) {
        auto& fa = u == v ? feature.genuine : feature.impostor;
        auto& ca = u == v ? cancel.genuine : cancel.impostor;
        auto& ba = u == v ? binary.genuine : binary.impostor;
        auto& bd = u == v ? bda.genuine : bda.impostor;
        fa.push_back(cosine_similarity(dataset.classes[v].samples[fold].values(), feat_ref[u]));
        ca.push_back(cosine_similarity(cancel_probe[v].values(), cancel_ref[u]));
        const auto sim = static_cast<double>(hamming_similarity(bin_probe[v], bin_ref[u]));
        ba.push_back(sim);
        bd.push_back(sim);
        if (baseline) {
          (u == v ? threshold.genuine : threshold.impostor)
              .push_back(static_cast<double>(hamming_similarity(thr_probe[v], thr_ref[u])));
        }
      }

      const bool accepted = authenticate(dataset.classes[u].samples[fold], records[u]).accepted;
      full.genuine.push_back(accepted ? 1.0 : 0.0);
      ++report.genuine_trials;
      report.genuine_accepts += accepted;
      for (std::size_t i = 0; i < impostors; ++i) {
        const std::size_t v = (u + 1 + i % (k - 1)) % k;
        const std::size_t s = (fold + i / (k - 1)) % r;
        const bool fa = authenticate(dataset.classes[v].samples[s], records[u]).accepted;
        full.impostor.push_back(fa ? 1.0 : 0.0);
        ++report.impostor_trials;
        report.impostor_accepts += fa;
      }
    }
  }

  report.stages = {feature.finish("feature_vector"), cancel.finish("cancelable"), binary.finish("binary"),
                   full.finish("full")};
  report.binarizers.push_back(bda.finish("bda"));
  if (baseline) report.binarizers.push_back(threshold.finish("threshold"));
  return report;
}

void write_stage_csv(const EvalReport& report, std::ostream& out) {
  out << "stage,genuine_mean,impostor_mean,count\n" << std::setprecision(17);
  for (const auto& s : report.stages) {
    out << s.stage << ',' << s.genuine_mean << ',' << s.impostor_mean << ',' << s.count() << '\n';
  }
  out << std::setprecision(6);
}

void write_binarizer_csv(const EvalReport& report, std::ostream& out) {
  out << "binarizer,genuine_mean,impostor_mean,margin,count\n" << std::setprecision(17);
  for (const auto& s : report.binarizers) {
    out << s.stage << ',' << s.genuine_mean << ',' << s.impostor_mean << ',' << s.margin() << ',' << s.count()
        << '\n';
  }
  out << std::setprecision(6);
}

void write_eval_text(const EvalReport& report, std::ostream& out) {
  out << "dataset: " << report.dataset << "\n\n";
  out << "Average matching score per stage\n";
  out << std::left << std::setw(16) << "stage" << std::right << std::setw(14) << "genuine" << std::setw(14)
      << "impostor" << std::setw(10) << "n_gen" << std::setw(10) << "n_imp" << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& s : report.stages) {
    out << std::left << std::setw(16) << s.stage << std::right << std::setw(14) << s.genuine_mean << std::setw(14)
        << s.impostor_mean << std::setw(10) << s.genuine_count << std::setw(10) << s.impostor_count << '\n';
  }
  out << "\nBinary template by binarizer\n";
  out << std::left << std::setw(16) << "binarizer" << std::right << std::setw(14) << "genuine" << std::setw(14)
      << "impostor" << std::setw(14) << "margin" << '\n';
  for (const auto& s : report.binarizers) {
    out << std::left << std::setw(16) << s.stage << std::right << std::setw(14) << s.genuine_mean << std::setw(14)
        << s.impostor_mean << std::setw(14) << s.margin() << '\n';
  }
  out << "\nFRR " << report.frr() << " (" << report.genuine_trials - report.genuine_accepts << "/"
      << report.genuine_trials << ")  FAR " << report.far() << " (" << report.impostor_accepts << "/"
      << report.impostor_trials << ")\n";
  out << std::defaultfloat << std::setprecision(6);
}

std::vector<StageRow> parse_stage_csv(std::string_view text) {
  std::vector<StageRow> rows;
  bool header = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    if (header) {
      if (line != "stage,genuine_mean,impostor_mean,count") fail(ErrorKind::parse, "unexpected stage report header");
      header = false;
      continue;
    }
    std::vector<std::string_view> f;
    std::size_t start = 0;
    for (;;) {
      const auto c = line.find(',', start);
      f.push_back(line.substr(start, c - start));
      if (c == std::string_view::npos) break;
      start = c + 1;
    }
    if (f.size() != 4) fail(ErrorKind::parse, "stage report rows have 4 fields");
    rows.push_back({std::string(f[0]), parse_number<double>(f[1], "genuine_mean"),
                    parse_number<double>(f[2], "impostor_mean"), parse_number<std::size_t>(f[3], "count")});
  }
  if (header) fail(ErrorKind::parse, "empty stage report");
  return rows;
}

// ---------------------------------------------------------------- timing

TimingRow run_bench(const Dataset& dataset, const std::string& name, const BenchOptions& options) {
  if (options.repetitions < 3) fail(ErrorKind::domain, "bench needs at least 3 repetitions");
  dataset.validate();
  options.config.validate();
  const std::size_t r = dataset.min_samples();
  if (r < 3) fail(ErrorKind::structural, "bench needs at least 3 samples per class");
  const CounterRng user_seeds = CounterRng(options.seed).split("users");

  std::vector<UserSamples> users(dataset.class_count());
  for (std::size_t u = 0; u < users.size(); ++u) {
    char id[32];
    std::snprintf(id, sizeof id, "u%04zu", u);
    users[u].user_id = id;
    users[u].master_seed = user_seeds.at(u);
    users[u].samples.assign(dataset.classes[u].samples.begin(), dataset.classes[u].samples.begin() + static_cast<std::ptrdiff_t>(r - 1));
  }
  const auto records = enroll_group(users, options.config, options.seed, {0, options.threads});

  std::vector<double> ms;
  for (std::size_t u = 0; u < records.size(); ++u) {
    const FeatureVector& probe = dataset.classes[u].samples[r - 1];
    for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      const AuthDecision d = authenticate(probe, records[u]);
      const auto stop = std::chrono::steady_clock::now();
      static_cast<void>(d);
      ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    }
  }
  TimingRow row{name, mean_of(ms), 0.0, ms.size()};
  double ss = 0.0;
  for (double x : ms) ss += (x - row.mean_ms) * (x - row.mean_ms);
  row.stddev_ms = std::sqrt(ss / static_cast<double>(ms.size() - 1));
  return row;
}

void write_timing_csv(const std::vector<TimingRow>& rows, std::ostream& out) {
  out << "dataset,mean_ms,stddev_ms,count\n" << std::setprecision(17);
  for (const auto& r : rows) out << r.dataset << ',' << r.mean_ms << ',' << r.stddev_ms << ',' << r.count << '\n';
  out << std::setprecision(6);
}

void write_timing_text(const std::vector<TimingRow>& rows, std::ostream& out) {
  out << "Computation time for verification stage\n";
  out << std::left << std::setw(24) << "dataset" << std::right << std::setw(12) << "mean_ms" << std::setw(12)
      << "stddev_ms" << std::setw(8) << "count" << '\n';
  out << std::fixed << std::setprecision(3);
  for (const auto& r : rows) {
    out << std::left << std::setw(24) << r.dataset << std::right << std::setw(12) << r.mean_ms << std::setw(12)
        << r.stddev_ms << std::setw(8) << r.count << '\n';
  }
  out << std::defaultfloat << std::setprecision(6);
}

std::vector<TimingRow> parse_timing_csv(std::string_view text) {
  std::vector<TimingRow> rows;
  bool header = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    if (header) {
      if (line != "dataset,mean_ms,stddev_ms,count") fail(ErrorKind::parse, "unexpected timing header");
      header = false;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const auto c3 = line.find(',', c2 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos || c3 == std::string_view::npos) {
      fail(ErrorKind::parse, "timing rows have 4 fields");
    }
    rows.push_back({std::string(line.substr(0, c1)), parse_number<double>(line.substr(c1 + 1, c2 - c1 - 1), "mean_ms"),
                    parse_number<double>(line.substr(c2 + 1, c3 - c2 - 1), "stddev_ms"),
                    parse_number<std::size_t>(line.substr(c3 + 1), "count")});
  }
  if (header) fail(ErrorKind::parse, "empty timing report");
  return rows;
}

}  // namespace bioprot
