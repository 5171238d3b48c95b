#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bioprot/linalg.hpp"

namespace bioprot {

struct LabeledClass {
  std::string label;
  std::vector<FeatureVector> samples;
};

/// k labeled classes of equal-length feature vectors.
struct Dataset {
  std::size_t length = 0;
  std::vector<LabeledClass> classes;
  std::string provenance;

  std::size_t class_count() const noexcept { return classes.size(); }
  std::size_t min_samples() const noexcept;
  std::size_t total_samples() const noexcept;
  /// Throws structural if labels repeat, a class is empty, or lengths differ.
  void validate() const;
};

struct SyntheticSpec {
  std::size_t classes = 10;
  std::size_t samples_per_class = 5;
  std::size_t length = 256;
  double sigma_within = 0.1;
  double sigma_between = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
  std::string describe() const;
};

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;  // row-major, 0..maxval
};

/// Decodes an 8-bit portable graymap (P2 or P5). `name` labels errors.
GrayImage decode_pgm(std::span<const std::uint8_t> bytes, const std::string& name);
/// Half-pixel-centred bilinear resampling; identity when sizes match.
GrayImage resize_bilinear(const GrayImage& image, std::size_t width, std::size_t height);
/// Zero mean, unit norm. Constant input is rejected as degenerate.
FeatureVector standardize(std::vector<double> values, const std::string& name);

/// One subdirectory per class, graymap files inside, both visited in
/// lexicographic order.
Dataset load_image_dir(const std::filesystem::path& root, std::size_t target_width,
                       std::size_t target_height);

Dataset parse_feature_csv(std::string_view text, const std::string& name);
Dataset load_feature_csv(const std::filesystem::path& path);
void write_feature_csv(const Dataset& dataset, std::ostream& out);

Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace bioprot
