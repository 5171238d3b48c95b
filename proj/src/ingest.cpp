#include "bioprot/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iterator>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "bioprot/error.hpp"
#include "bioprot/rng.hpp"

namespace bioprot {

namespace fs = std::filesystem;

std::size_t Dataset::min_samples() const noexcept {
  std::size_t m = classes.empty() ? 0 : classes.front().samples.size();
  for (const auto& c : classes) m = std::min(m, c.samples.size());
  return m;
}

std::size_t Dataset::total_samples() const noexcept {
  std::size_t total = 0;
  for (const auto& c : classes) total += c.samples.size();
  return total;
}

void Dataset::validate() const {
  if (classes.empty()) fail(ErrorKind::structural, "dataset has no classes");
  if (length == 0) fail(ErrorKind::structural, "dataset feature length is zero");
  std::set<std::string> seen;
  for (const auto& c : classes) {
    if (!seen.insert(c.label).second) fail(ErrorKind::structural, "duplicate class label '" + c.label + "'");
    if (c.samples.empty()) fail(ErrorKind::structural, "class '" + c.label + "' has no samples");
    for (const auto& s : c.samples) {
      if (s.size() != length) fail(ErrorKind::structural, "class '" + c.label + "' has a vector of wrong length");
    }
  }
}

void SyntheticSpec::validate() const {
  if (classes == 0 || samples_per_class == 0 || length == 0) {
    fail(ErrorKind::domain, "synthetic counts must be positive");
  }
  if (!(sigma_within >= 0.0) || !std::isfinite(sigma_within)) {
    fail(ErrorKind::domain, "sigma_within must be finite and non-negative");
  }
  if (!(sigma_between > 0.0) || !std::isfinite(sigma_between)) {
    fail(ErrorKind::domain, "sigma_between must be finite and positive");
  }
}

std::string SyntheticSpec::describe() const {
  std::ostringstream s;
  s << "synthetic(k=" << classes << ",r=" << samples_per_class << ",l=" << length
    << ",sigma_within=" << sigma_within << ",sigma_between=" << sigma_between << ",seed=" << seed
    << ")";
  return s.str();
}

// ---------------------------------------------------------------- images

namespace {

class PgmReader {
 public:
  PgmReader(std::span<const std::uint8_t> bytes, const std::string& name)
      : bytes_(bytes), name_(name) {}

  [[noreturn]] void bad(const std::string& why) const {
    fail(ErrorKind::ingest, name_ + ": " + why);
  }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number() {
    skip_space_and_comments();
    std::size_t value = 0;
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1U << 24)) bad("header value out of range");
      ++pos_;
    }
    if (pos_ == start) bad("malformed graymap header");
    return value;
  }

  std::size_t& pos() { return pos_; }
  std::span<const std::uint8_t> bytes() const { return bytes_; }

 private:
  std::span<const std::uint8_t> bytes_;
  const std::string& name_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::ingest, path.string() + ": cannot open file");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::ingest, path.string() + ": read failed");
  return bytes;
}

}  // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes, const std::string& name) {
  PgmReader reader(bytes, name);
  if (bytes.size() < 2 || bytes[0] != 'P') reader.bad("not a portable graymap");
  const char variant = static_cast<char>(bytes[1]);
  if (variant == '3' || variant == '6') reader.bad("color images are not supported; convert to graymap");
  if (variant != '2' && variant != '5') reader.bad("unsupported portable anymap variant");
  reader.pos() = 2;

  GrayImage img;
  img.width = reader.number();
  img.height = reader.number();
  const std::size_t maxval = reader.number();
  if (img.width == 0 || img.height == 0) reader.bad("zero image dimension");
  if (maxval == 0 || maxval > 255) reader.bad("only 8-bit graymaps are supported");

  const std::size_t count = img.width * img.height;
  img.pixels.resize(count);
  if (variant == '5') {
    std::size_t& pos = reader.pos();
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) reader.bad("malformed raster separator");
    ++pos;
    if (bytes.size() - pos < count) reader.bad("truncated raster");
    for (std::size_t i = 0; i < count; ++i) img.pixels[i] = bytes[pos + i];
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t v = reader.number();
      if (v > maxval) reader.bad("pixel exceeds maxval");
      img.pixels[i] = static_cast<double>(v);
    }
  }
  for (double p : img.pixels) {
    if (p > static_cast<double>(maxval)) reader.bad("pixel exceeds maxval");
  }
  return img;
}

GrayImage resize_bilinear(const GrayImage& image, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0) fail(ErrorKind::domain, "target size must be positive");
  if (width == image.width && height == image.height) return image;
  GrayImage out{width, height, std::vector<double>(width * height)};
  const double sx = static_cast<double>(image.width) / static_cast<double>(width);
  const double sy = static_cast<double>(image.height) / static_cast<double>(height);
  const auto src = [&](std::size_t x, std::size_t y) { return image.pixels[y * image.width + x]; };
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0,
                                 static_cast<double>(image.height - 1));
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(image.width - 1));
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - static_cast<double>(x0);
      const double top = src(x0, y0) * (1 - wx) + src(x1, y0) * wx;
      const double bottom = src(x0, y1) * (1 - wx) + src(x1, y1) * wx;
      out.pixels[y * width + x] = top * (1 - wy) + bottom * wy;
    }
  }
  return out;
}

FeatureVector standardize(std::vector<double> values, const std::string& name) {
  if (values.empty()) fail(ErrorKind::ingest, name + ": empty sample");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double sq = 0.0;
  for (double& v : values) {
    v -= mean;
    sq += v * v;
  }
  const double len = std::sqrt(sq);
  // Relative threshold: rounding leaves ~1e-16 * |mean| residue on constant input.
  if (!(len > 1e-12 * std::max(1.0, std::abs(mean)) * std::sqrt(static_cast<double>(values.size())))) {
    fail(ErrorKind::ingest, name + ": degenerate sample (zero variance)");
  }
  for (double& v : values) v /= len;
  return FeatureVector(std::move(values));
}

Dataset load_image_dir(const fs::path& root, std::size_t target_width, std::size_t target_height) {
  if (target_width == 0 || target_height == 0) fail(ErrorKind::domain, "target size must be positive");
  std::error_code ec;
  if (!fs::is_directory(root, ec)) fail(ErrorKind::ingest, root.string() + ": not a directory");

  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) fail(ErrorKind::structural, root.string() + ": no class subdirectories");

  Dataset ds;
  ds.length = target_width * target_height;
  ds.provenance = "images:" + root.string();
  for (const auto& dir : class_dirs) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      const auto ext = entry.path().extension().string();
      if (ext == ".pgm" || ext == ".PGM" || ext == ".pnm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) fail(ErrorKind::structural, dir.string() + ": class directory has no images");

    // Decode concurrently; collect in sorted path order.
    std::vector<std::future<FeatureVector>> jobs;
    jobs.reserve(files.size());
    for (const auto& file : files) {
      jobs.push_back(std::async(std::launch::async, [file, target_width, target_height] {
        const auto bytes = read_file(file);
        const auto img = resize_bilinear(decode_pgm(bytes, file.string()), target_width, target_height);
        return standardize(img.pixels, file.string());
      }));
    }
    LabeledClass cls{dir.filename().string(), {}};
    for (auto& job : jobs) cls.samples.push_back(job.get());
    ds.classes.push_back(std::move(cls));
  }
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------- csv

Dataset parse_feature_csv(std::string_view text, const std::string& name) {
  Dataset ds;
  ds.provenance = "csv:" + name;
  std::map<std::string, std::size_t> index;
  std::size_t row = 0;
  std::size_t expected_fields = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++row;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const std::string where = name + ": row " + std::to_string(row);
    if (fields.size() < 2) fail(ErrorKind::parse, where + ": expected a label and at least one value");
    if (expected_fields == 0) {
      expected_fields = fields.size();
    } else if (fields.size() != expected_fields) {
      fail(ErrorKind::parse, where + ": has " + std::to_string(fields.size()) + " fields, expected " +
                                 std::to_string(expected_fields));
    }
    std::vector<double> values(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      std::string_view f = fields[i];
      while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
      while (!f.empty() && f.back() == ' ') f.remove_suffix(1);
      if (!f.empty() && f.front() == '+') f.remove_prefix(1);
      const auto [ptr, err] = std::from_chars(f.data(), f.data() + f.size(), values[i - 1]);
      if (err != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(values[i - 1])) {
        fail(ErrorKind::parse, where + ": field " + std::to_string(i + 1) + " is not a finite number");
      }
    }
    const std::string label(fields[0]);
    if (label.empty()) fail(ErrorKind::parse, where + ": empty label");
    auto [it, inserted] = index.emplace(label, ds.classes.size());
    if (inserted) ds.classes.push_back({label, {}});
    ds.classes[it->second].samples.emplace_back(std::move(values));
  }
  if (ds.classes.empty()) fail(ErrorKind::structural, name + ": no samples");
  ds.length = expected_fields - 1;
  ds.validate();
  return ds;
}

Dataset load_feature_csv(const fs::path& path) {
  const auto bytes = read_file(path);
  return parse_feature_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                           path.string());
}

void write_feature_csv(const Dataset& dataset, std::ostream& out) {
  char buf[64];
  for (const auto& cls : dataset.classes) {
    for (const auto& sample : cls.samples) {
      out << cls.label;
      for (double v : sample.values()) {
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
      }
      out << '\n';
    }
  }
}

// ---------------------------------------------------------------- synthetic

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const CounterRng root(spec.seed);
  const CounterRng centers = root.split("centers");
  const CounterRng noise = root.split("noise");
  Dataset ds;
  ds.length = spec.length;
  ds.provenance = spec.describe();
  for (std::size_t c = 0; c < spec.classes; ++c) {
    LabeledClass cls;
    char label[32];
    std::snprintf(label, sizeof label, "c%03zu", c);
    cls.label = label;
    std::vector<double> center(spec.length);
    for (std::size_t i = 0; i < spec.length; ++i) {
      center[i] = spec.sigma_between * centers.normal_at(c * spec.length + i);
    }
    for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
      std::vector<double> v(center);
      if (spec.sigma_within > 0.0) {
        const std::uint64_t base = (c * spec.samples_per_class + s) * spec.length;
        for (std::size_t i = 0; i < spec.length; ++i) v[i] += spec.sigma_within * noise.normal_at(base + i);
      }
      cls.samples.emplace_back(std::move(v));
    }
    ds.classes.push_back(std::move(cls));
  }
  return ds;
}

}  // namespace bioprot
