#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bioprot/bits.hpp"
#include "bioprot/linalg.hpp"

namespace bioprot {

/// Reference codewords, one per class, pairwise at least d_min apart.
struct TargetCodebook {
  std::size_t bits = 0;
  std::size_t d_min = 0;
  std::uint64_t seed = 0;
  std::vector<BitString> codewords;
};

inline constexpr std::uint64_t codebook_draw_budget = 1'000'000;

/// Rejection-samples k codewords of n bits from CounterRng(seed).
TargetCodebook assign_targets(std::size_t k, std::size_t n, std::size_t d_min, std::uint64_t seed);

/// Default d_min = ceil(n / 4).
constexpr std::size_t default_min_distance(std::size_t n) noexcept { return (n + 3) / 4; }

struct PerceptronOptions {
  std::size_t max_epochs = 1000;
  double learning_rate = 1.0;
  /// Updates also fire while t * activation <= margin * mean ||x||^2.
  /// Zero gives the plain error-driven rule.
  double margin = 1.0;
};

struct LinearDiscriminant {
  std::vector<double> weights;
  double bias = 0.0;

  double activation(std::span<const double> x) const;
  /// Tie rule: activation 0 maps to bit 1.
  bool decide(std::span<const double> x) const { return activation(x) >= 0.0; }
};

/// Training inputs shared by every bit: the sample matrix in a fixed order
/// plus its augmented Gram matrix. The constant bias input is the RMS sample
/// norm so bias and weight updates move on the same scale.
class TrainingSet {
 public:
  explicit TrainingSet(std::vector<CancelableTemplate> samples);

  std::size_t size() const noexcept { return samples_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  const CancelableTemplate& sample(std::size_t i) const noexcept { return samples_[i]; }
  double bias_input() const noexcept { return bias_input_; }
  double mean_square_norm() const noexcept { return mean_square_norm_; }
  double gram(std::size_t i, std::size_t j) const noexcept { return gram_[i * samples_.size() + j]; }

 private:
  std::vector<CancelableTemplate> samples_;
  std::size_t dimension_ = 0;
  double bias_input_ = 1.0;
  double mean_square_norm_ = 0.0;
  std::vector<double> gram_;
};

/// Pocket perceptron from zero weights in fixed sample order. Returns the
/// weights with the fewest training errors seen, ties broken by fewer margin
/// violations. Targets are 0/1.
LinearDiscriminant train_bit(const TrainingSet& set, std::span<const std::uint8_t> targets,
                             const PerceptronOptions& options);
LinearDiscriminant train_bit(std::span<const CancelableTemplate> samples,
                             std::span<const std::uint8_t> targets, const PerceptronOptions& options);

/// Number of training samples the discriminant puts on the wrong side.
std::size_t training_errors(const LinearDiscriminant& f, std::span<const CancelableTemplate> samples,
                            std::span<const std::uint8_t> targets);

/// n linear discriminant functions over l_r-dimensional templates.
class BDAModel {
 public:
  BDAModel() = default;
  BDAModel(Matrix weights, std::vector<double> biases);

  std::size_t bits() const noexcept { return weights_.rows(); }
  std::size_t dimension() const noexcept { return weights_.cols(); }
  const Matrix& weights() const noexcept { return weights_; }
  const std::vector<double>& biases() const noexcept { return biases_; }
  LinearDiscriminant function(std::size_t bit) const;

  friend bool operator==(const BDAModel&, const BDAModel&) = default;

 private:
  Matrix weights_;
  std::vector<double> biases_;
};

/// Per-class training data, class order matching the codebook.
using ClassTemplates = std::vector<std::vector<CancelableTemplate>>;

/// Trains every bit independently against the class codewords. Bits are
/// spread over `threads` workers (0 = hardware concurrency); the result does
/// not depend on the thread count.
BDAModel train_bda(const ClassTemplates& classes, const TargetCodebook& codebook,
                   const PerceptronOptions& options, unsigned threads = 0);

BitString binarize(const CancelableTemplate& x, const BDAModel& model);

/// Baseline: bit j is the sign of coordinate j (zero maps to 1).
BitString threshold_binarize(const CancelableTemplate& x, std::size_t n);

/// n minus the Hamming distance.
std::size_t hamming_similarity(const BitString& a, const BitString& b);

/// Per-position majority; ties map to 1.
BitString majority_vote(std::span<const BitString> templates);

}  // namespace bioprot
