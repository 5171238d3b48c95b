#include "bioprot/pipeline.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "bioprot/error.hpp"
#include "bioprot/rng.hpp"
#include "bioprot/wire.hpp"

namespace bioprot {

namespace fs = std::filesystem;

std::string_view to_string(TrainingMode mode) noexcept {
  return mode == TrainingMode::multi_class ? "multi_class" : "per_user";
}

std::string_view to_string(ReferenceRule rule) noexcept {
  return rule == ReferenceRule::first ? "first" : "majority";
}

EccCodec SystemConfig::codec() const {
  return EccCodec::repetition(rho, static_cast<std::uint32_t>(n));
}

void SystemConfig::validate() const {
  if (l == 0 || l_r == 0 || n == 0) fail(ErrorKind::domain, "l, l_r and n must be positive");
  if (l_r > l) fail(ErrorKind::dimension, "l_r must not exceed l");
  if (n > 0xFFFFFFFFULL || l > 0xFFFFFFFFULL) fail(ErrorKind::domain, "dimension too large");
  codec();
  if (min_distance() > n) fail(ErrorKind::domain, "d_min exceeds n");
  if (max_epochs < 1 || max_epochs > 0xFFFFFFFFULL) fail(ErrorKind::domain, "max_epochs out of range");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail(ErrorKind::domain, "learning_rate must be positive");
  if (!(margin >= 0.0) || !std::isfinite(margin)) fail(ErrorKind::domain, "margin must be non-negative");
  if (mode != TrainingMode::per_user && mode != TrainingMode::multi_class) fail(ErrorKind::domain, "unknown mode");
  if (reference != ReferenceRule::majority && reference != ReferenceRule::first) {
    fail(ErrorKind::domain, "unknown reference rule");
  }
  if (mode == TrainingMode::per_user && cohort_classes == 0) {
    fail(ErrorKind::domain, "per-user mode needs at least one cohort class");
  }
  require_hash(hash);
}

DerivedSeeds derive_seeds(std::uint64_t master_seed, std::string_view hash_name) {
  ByteWriter m;
  m.u64(master_seed);
  const auto sub = [&](std::string_view label) {
    const std::string_view domain = "bioprot/seed/";
    const Digest d = hash256(hash_name, {{reinterpret_cast<const std::uint8_t*>(domain.data()), domain.size()},
                                         m.data(),
                                         {reinterpret_cast<const std::uint8_t*>(label.data()), label.size()}});
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{d[static_cast<std::size_t>(i)]} << (8 * i);
    return v;
  };
  return {sub("projection"), sub("codeword"), sub("key"), sub("cohort")};
}

namespace {

std::vector<CancelableTemplate> project_all(std::span<const FeatureVector> samples, const ProjectionMatrix& p) {
  std::vector<CancelableTemplate> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(project(s, p));
  return out;
}

void check_samples(std::string_view user_id, std::span<const FeatureVector> samples, const SystemConfig& config) {
  validate_user_id(user_id);
  if (samples.size() < 2) {
    fail(ErrorKind::domain, "enrollment of '" + std::string(user_id) + "' needs at least 2 samples");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != config.l) {
      fail(ErrorKind::dimension, "sample " + std::to_string(i) + " has length " +
                                     std::to_string(samples[i].size()) + ", expected " +
                                     std::to_string(config.l));
    }
    if (norm(samples[i].values()) == 0.0) {
      fail(ErrorKind::domain, "sample " + std::to_string(i) + " of '" + std::string(user_id) + "' is degenerate");
    }
  }
}

/// Background classes in cancelable space, scaled to the user's own data:
/// centres ~ N(0, s_b^2), samples ~ centre + N(0, s_w^2).
std::vector<std::vector<CancelableTemplate>> make_cohort(const std::vector<CancelableTemplate>& user,
                                                        std::size_t classes, std::uint64_t seed) {
  const std::size_t dim = user.front().size();
  const std::size_t count = user.size();
  std::vector<double> mean(dim, 0.0);
  for (const auto& s : user) {
    for (std::size_t d = 0; d < dim; ++d) mean[d] += s[d];
  }
  for (double& m : mean) m /= static_cast<double>(count);
  double between = 0.0;
  double within = 0.0;
  double total = 0.0;
  for (std::size_t d = 0; d < dim; ++d) between += mean[d] * mean[d];
  for (const auto& s : user) {
    for (std::size_t d = 0; d < dim; ++d) {
      within += (s[d] - mean[d]) * (s[d] - mean[d]);
      total += s[d] * s[d];
    }
  }
  between = std::sqrt(between / static_cast<double>(dim));
  within = std::sqrt(within / static_cast<double>(dim * count));
  if (!(between > 0.0)) between = std::sqrt(total / static_cast<double>(dim * count));
  within = std::max(within, 0.05 * between);

  const CounterRng rng(seed);
  const CounterRng centres = rng.split("centres");
  const CounterRng noise = rng.split("noise");
  std::vector<std::vector<CancelableTemplate>> out(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t s = 0; s < count; ++s) {
      std::vector<double> v(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        v[d] = between * centres.normal_at(c * dim + d) + within * noise.normal_at((c * count + s) * dim + d);
      }
      out[c].emplace_back(std::move(v));
    }
  }
  return out;
}

BitString reference_template(const std::vector<CancelableTemplate>& templates, const BDAModel& model,
                             ReferenceRule rule) {
  if (rule == ReferenceRule::first) return binarize(templates.front(), model);
  std::vector<BitString> bins;
  bins.reserve(templates.size());
  for (const auto& t : templates) bins.push_back(binarize(t, model));
  return majority_vote(bins);
}

}  // namespace

EnrollmentRecord enroll(std::string user_id, std::span<const FeatureVector> samples, const SystemConfig& config,
                        std::uint64_t master_seed, const EnrollOptions& options) {
  config.validate();
  if (config.mode == TrainingMode::multi_class) {
    const UserSamples one{std::move(user_id), {samples.begin(), samples.end()}, master_seed};
    return enroll_group(std::span(&one, 1), config, master_seed, options).front();
  }
  check_samples(user_id, samples, config);
  const DerivedSeeds seeds = derive_seeds(master_seed, config.hash);
  const ProjectionMatrix projection = generate_projection_matrix(seeds.projection, config.l, config.l_r);

  ClassTemplates classes;
  classes.push_back(project_all(samples, projection));
  auto cohort = make_cohort(classes.front(), config.cohort_classes, seeds.cohort);
  std::move(cohort.begin(), cohort.end(), std::back_inserter(classes));

  const TargetCodebook codebook = assign_targets(classes.size(), config.n, config.min_distance(), seeds.codeword);
  BDAModel model = train_bda(classes, codebook, config.perceptron(), options.threads);
  const BitString reference = reference_template(classes.front(), model, config.reference);

  EnrollmentRecord record;
  record.user_id = std::move(user_id);
  record.config = config;
  record.config.d_min = config.min_distance();
  record.projection_seed = seeds.projection;
  record.commitment = commit(reference, config.codec(), seeds.key, config.hash);
  record.model = std::move(model);
  record.created_at = options.created_at;
  return record;
}

std::vector<EnrollmentRecord> enroll_group(std::span<const UserSamples> users, const SystemConfig& config,
                                           std::uint64_t system_seed, const EnrollOptions& options) {
  config.validate();
  if (users.empty()) fail(ErrorKind::structural, "no users to enroll");
  std::set<std::string_view> ids;
  for (const auto& u : users) {
    if (!ids.insert(u.user_id).second) fail(ErrorKind::structural, "duplicate user id '" + u.user_id + "'");
  }

  std::vector<EnrollmentRecord> records;
  records.reserve(users.size());
  if (config.mode == TrainingMode::per_user) {
    for (const auto& u : users) records.push_back(enroll(u.user_id, u.samples, config, u.master_seed, options));
    return records;
  }

  ClassTemplates classes;
  std::vector<DerivedSeeds> seeds;
  for (const auto& u : users) {
    check_samples(u.user_id, u.samples, config);
    seeds.push_back(derive_seeds(u.master_seed, config.hash));
    const auto projection = generate_projection_matrix(seeds.back().projection, config.l, config.l_r);
    classes.push_back(project_all(u.samples, projection));
  }
  const DerivedSeeds system = derive_seeds(system_seed, config.hash);
  const TargetCodebook codebook = assign_targets(users.size(), config.n, config.min_distance(), system.codeword);
  const BDAModel model = train_bda(classes, codebook, config.perceptron(), options.threads);

  for (std::size_t i = 0; i < users.size(); ++i) {
    EnrollmentRecord record;
    record.user_id = users[i].user_id;
    record.config = config;
    record.config.d_min = config.min_distance();
    record.projection_seed = seeds[i].projection;
    record.model = model;
    record.commitment = commit(reference_template(classes[i], model, config.reference), config.codec(),
                               seeds[i].key, config.hash);
    record.created_at = options.created_at;
    records.push_back(std::move(record));
  }
  return records;
}

ProjectionMatrix regenerate_projection(const EnrollmentRecord& record) {
  return generate_projection_matrix(record.projection_seed, record.config.l, record.config.l_r);
}

BitString binary_template(const FeatureVector& probe, const EnrollmentRecord& record) {
  return binarize(project(probe, regenerate_projection(record)), record.model);
}

AuthDecision authenticate(const FeatureVector& probe, const EnrollmentRecord& record, AuthMode mode) {
  if (probe.size() != record.config.l) {
    fail(ErrorKind::dimension, "probe has length " + std::to_string(probe.size()) + ", record expects " +
                                   std::to_string(record.config.l));
  }
  CancelableTemplate cancelable = project(probe, regenerate_projection(record));
  BitString binary = binarize(cancelable, record.model);
  const VerifyResult verdict = verify_commitment(binary, record.commitment);
  AuthDecision decision{verdict.accepted, std::nullopt};
  if (mode == AuthMode::evaluation) {
    decision.diagnostics = StageDiagnostics{std::move(cancelable), std::move(binary), verdict.corrected_errors};
  }
  return decision;
}

EnrollmentRecord revoke_reissue(const EnrollmentRecord& record, std::uint64_t new_master_seed,
                                std::span<const FeatureVector> samples, const EnrollOptions& options) {
  if (record.config.mode != TrainingMode::per_user) {
    fail(ErrorKind::policy, "multi-class records are reissued by re-enrolling the whole group");
  }
  if (derive_seeds(new_master_seed, record.config.hash).projection == record.projection_seed) {
    fail(ErrorKind::policy, "reissue must use a fresh seed");
  }
  return enroll(record.user_id, samples, record.config, new_master_seed, options);
}

// ---------------------------------------------------------------- records

namespace {

void write_config(ByteWriter& w, const EnrollmentRecord& r) {
  const SystemConfig& c = r.config;
  w.str16(r.user_id);
  w.i64(r.created_at);
  w.str16(c.hash);
  w.u32(static_cast<std::uint32_t>(c.l));
  w.u32(static_cast<std::uint32_t>(c.l_r));
  w.u32(static_cast<std::uint32_t>(c.n));
  w.u16(c.rho);
  w.u32(static_cast<std::uint32_t>(c.min_distance()));
  w.u32(static_cast<std::uint32_t>(c.max_epochs));
  w.f64(c.learning_rate);
  w.f64(c.margin);
  w.u8(static_cast<std::uint8_t>(c.mode));
  w.u32(static_cast<std::uint32_t>(c.cohort_classes));
  w.u8(static_cast<std::uint8_t>(c.reference));
}

}  // namespace

std::vector<std::uint8_t> serialize_record(const EnrollmentRecord& record) {
  ByteWriter w;
  w.raw("NBT1");
  w.u16(record_format_version);
  write_config(w, record);
  w.u64(record.projection_seed);
  for (double v : record.model.weights().data()) w.f64(v);
  for (double v : record.model.biases()) w.f64(v);
  write_commitment(w, record.commitment);
  w.u32(crc32(w.data()));
  return w.take();
}

EnrollmentRecord deserialize_record(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 10) fail(ErrorKind::integrity, "record truncated");
  if (std::string_view(reinterpret_cast<const char*>(bytes.data()), 4) != "NBT1") {
    fail(ErrorKind::integrity, "bad record magic");
  }
  const auto body = bytes.first(bytes.size() - 4);
  ByteReader tail(bytes.last(4));
  if (tail.u32() != crc32(body)) fail(ErrorKind::integrity, "record checksum mismatch");

  ByteReader in(body);
  in.bytes(4);
  if (const auto version = in.u16(); version != record_format_version) {
    fail(ErrorKind::integrity, "unsupported record version " + std::to_string(version));
  }
  EnrollmentRecord r;
  SystemConfig& c = r.config;
  r.user_id = in.str16();
  r.created_at = in.i64();
  c.hash = in.str16();
  c.l = in.u32();
  c.l_r = in.u32();
  c.n = in.u32();
  c.rho = in.u16();
  c.d_min = in.u32();
  c.max_epochs = in.u32();
  c.learning_rate = in.f64();
  c.margin = in.f64();
  c.mode = static_cast<TrainingMode>(in.u8());
  c.cohort_classes = in.u32();
  c.reference = static_cast<ReferenceRule>(in.u8());
  try {
    validate_user_id(r.user_id);
    c.validate();
  } catch (const Error& e) {
    fail(ErrorKind::integrity, std::string("invalid record header: ") + e.what());
  }
  r.projection_seed = in.u64();
  if (in.remaining() / 8 / c.l_r < c.n) fail(ErrorKind::integrity, "record truncated");
  std::vector<double> weights(c.n * c.l_r);
  for (double& v : weights) v = in.f64();
  std::vector<double> biases(c.n);
  for (double& v : biases) v = in.f64();
  try {
    r.model = BDAModel(Matrix(c.n, c.l_r, std::move(weights)), std::move(biases));
  } catch (const Error& e) {
    fail(ErrorKind::integrity, std::string("invalid model: ") + e.what());
  }
  r.commitment = read_commitment(in, c.hash);
  if (r.commitment.codec != c.codec()) fail(ErrorKind::integrity, "commitment codec disagrees with config");
  if (in.remaining() != 0) fail(ErrorKind::integrity, "trailing bytes in record");
  return r;
}

// ---------------------------------------------------------------- store

void validate_user_id(std::string_view user_id) {
  const bool ok = !user_id.empty() && user_id.size() <= 64 &&
                  std::all_of(user_id.begin(), user_id.end(), [](char ch) {
                    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '_' ||
                           ch == '@' || ch == '-';
                  }) &&
                  user_id.front() != '.';
  if (!ok) fail(ErrorKind::domain, "invalid user id '" + std::string(user_id) + "'");
}

std::string format_rfc3339(std::int64_t unix_seconds) {
  const auto t = static_cast<std::time_t>(unix_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

/// flock-held lock file, released on destruction.
class FileLock {
 public:
  FileLock(const fs::path& path, bool exclusive_create) : path_(path), created_(exclusive_create) {
    const int flags = O_RDWR | O_CREAT | O_CLOEXEC | (exclusive_create ? O_EXCL : 0);
    fd_ = ::open(path.c_str(), flags, 0644);
    if (fd_ < 0) {
      if (exclusive_create && errno == EEXIST) {
        fail(ErrorKind::policy, "another enrollment holds " + path.filename().string());
      }
      fail(ErrorKind::integrity, "cannot open lock " + path.string());
    }
    if (!exclusive_create && ::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      fail(ErrorKind::integrity, "cannot lock " + path.string());
    }
  }
  ~FileLock() {
    if (created_) ::unlink(path_.c_str());
    if (!created_) ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  fs::path path_;
  bool created_;
  int fd_ = -1;
};

std::atomic<unsigned> temp_counter{0};

void write_atomic(const fs::path& target, std::span<const std::uint8_t> bytes) {
  const fs::path tmp = target.parent_path() / (".tmp-" + target.filename().string() + "-" +
                                               std::to_string(::getpid()) + "-" +
                                               std::to_string(temp_counter++));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) fail(ErrorKind::integrity, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorKind::integrity, "cannot replace " + target.string());
  }
}

std::vector<std::uint8_t> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::integrity, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TemplateStore::TemplateStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (!fs::is_directory(root_)) fail(ErrorKind::integrity, "store path is not a directory: " + root_.string());
}

std::vector<StoreEntry> TemplateStore::read_index() const {
  std::vector<StoreEntry> entries;
  const fs::path path = root_ / "index.tsv";
  if (!fs::exists(path)) return entries;
  std::ifstream in(path);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string part; std::getline(ss, part, '\t');) f.push_back(part);
    if (f.size() != 4 || (f[1] != "active" && f[1] != "revoked")) {
      fail(ErrorKind::integrity, "store index line " + std::to_string(row) + " is malformed");
    }
    entries.push_back({f[0], f[1] == "active" ? RecordStatus::active : RecordStatus::revoked, f[2], f[3]});
  }
  return entries;
}

void TemplateStore::write_index(const std::vector<StoreEntry>& entries) const {
  std::string text;
  for (const auto& e : entries) {
    text += e.user_id + '\t' + (e.status == RecordStatus::active ? "active" : "revoked") + '\t' + e.file + '\t' +
            e.created + '\n';
  }
  write_atomic(root_ / "index.tsv", {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::vector<StoreEntry> TemplateStore::entries() const { return read_index(); }

std::string TemplateStore::put(const EnrollmentRecord& record) {
  validate_user_id(record.user_id);
  const auto bytes = serialize_record(record);
  const FileLock user_lock(root_ / (record.user_id + ".lock"), true);
  const FileLock index_lock(root_ / "index.lock", false);

  auto entries = read_index();
  std::size_t seq = 1;
  for (auto& e : entries) {
    if (e.user_id != record.user_id) continue;
    ++seq;
    e.status = RecordStatus::revoked;
  }
  const std::string file = record.user_id + "." + std::to_string(seq) + ".nbt";
  write_atomic(root_ / file, bytes);
  const std::int64_t when = record.created_at != 0 ? record.created_at : static_cast<std::int64_t>(std::time(nullptr));
  entries.push_back({record.user_id, RecordStatus::active, file, format_rfc3339(when)});
  write_index(entries);
  return file;
}

EnrollmentRecord TemplateStore::load(const StoreEntry& entry) const {
  const fs::path path = root_ / entry.file;
  if (!fs::exists(path)) fail(ErrorKind::integrity, "record file missing: " + entry.file);
  EnrollmentRecord r = deserialize_record(read_all(path));
  if (r.user_id != entry.user_id) fail(ErrorKind::integrity, "record file belongs to another user");
  return r;
}

EnrollmentRecord TemplateStore::get(std::string_view user_id) const {
  return deserialize_record(get_bytes(user_id));
}

std::vector<std::uint8_t> TemplateStore::get_bytes(std::string_view user_id) const {
  const auto entries = read_index();
  bool known = false;
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    if (it->user_id != user_id) continue;
    known = true;
    if (it->status == RecordStatus::active) {
      auto bytes = read_all(root_ / it->file);
      // Validate before handing bytes out.
      if (deserialize_record(bytes).user_id != user_id) fail(ErrorKind::integrity, "record file belongs to another user");
      return bytes;
    }
  }
  if (known) throw RevokedError("user '" + std::string(user_id) + "' is revoked");
  fail(ErrorKind::not_found, "user '" + std::string(user_id) + "' not found");
}

EnrollmentRecord TemplateStore::get_file(std::string_view user_id, std::string_view file) const {
  for (const auto& e : read_index()) {
    if (e.user_id != user_id || e.file != file) continue;
    if (e.status == RecordStatus::revoked) throw RevokedError("record " + std::string(file) + " is revoked");
    return load(e);
  }
  fail(ErrorKind::not_found, "record " + std::string(file) + " not found");
}

std::vector<StoreEntry> TemplateStore::list() const {
  std::vector<StoreEntry> out;
  for (const auto& e : read_index()) {
    auto it = std::find_if(out.begin(), out.end(), [&](const StoreEntry& o) { return o.user_id == e.user_id; });
    if (it == out.end()) {
      out.push_back(e);
    } else {
      *it = e;
    }
  }
  std::sort(out.begin(), out.end(), [](const StoreEntry& a, const StoreEntry& b) { return a.user_id < b.user_id; });
  return out;
}

void TemplateStore::revoke(std::string_view user_id) {
  const FileLock index_lock(root_ / "index.lock", false);
  auto entries = read_index();
  bool known = false;
  for (auto& e : entries) {
    if (e.user_id != user_id) continue;
    known = true;
    e.status = RecordStatus::revoked;
  }
  if (!known) fail(ErrorKind::not_found, "user '" + std::string(user_id) + "' not found");
  write_index(entries);
}

}  // namespace bioprot
