#include "bioprot/bda.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "bioprot/error.hpp"
#include "bioprot/rng.hpp"

namespace bioprot {

TargetCodebook assign_targets(std::size_t k, std::size_t n, std::size_t d_min, std::uint64_t seed) {
  if (k == 0) fail(ErrorKind::domain, "codebook needs at least one class");
  if (n == 0) fail(ErrorKind::domain, "codeword length must be positive");
  if (d_min > n) fail(ErrorKind::domain, "d_min exceeds codeword length");
  if (n < 64 && k > (std::uint64_t{1} << n)) {
    fail(ErrorKind::infeasible, std::to_string(k) + " distinct codewords cannot fit in " +
                                    std::to_string(n) + " bits");
  }
  // Distinctness is required even when d_min is 0.
  const std::size_t floor = std::max<std::size_t>(d_min, 1);
  const CounterRng rng(seed);
  const std::size_t words = (n + 63) / 64;

  TargetCodebook book{n, d_min, seed, {}};
  book.codewords.reserve(k);
  for (std::uint64_t draw = 0; book.codewords.size() < k; ++draw) {
    if (draw >= codebook_draw_budget) {
      fail(ErrorKind::capacity, "could not place " + std::to_string(k) + " codewords at distance " +
                                    std::to_string(d_min) + " within " +
                                    std::to_string(codebook_draw_budget) +
                                    " draws; increase n or lower d_min");
    }
    BitString candidate(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t word = rng.at(draw * words + i / 64);
      candidate.set(i, (word >> (i % 64)) & 1U);
    }
    const bool far_enough = std::all_of(book.codewords.begin(), book.codewords.end(),
                                        [&](const BitString& c) { return hamming_distance(c, candidate) >= floor; });
    if (far_enough) book.codewords.push_back(std::move(candidate));
  }
  return book;
}

double LinearDiscriminant::activation(std::span<const double> x) const {
  return dot(weights, x) + bias;
}

TrainingSet::TrainingSet(std::vector<CancelableTemplate> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) fail(ErrorKind::domain, "training set is empty");
  dimension_ = samples_.front().size();
  const std::size_t count = samples_.size();
  double total = 0.0;
  for (const auto& s : samples_) {
    if (s.size() != dimension_) fail(ErrorKind::dimension, "training samples differ in length");
    total += dot(s.values(), s.values());
  }
  mean_square_norm_ = total / static_cast<double>(count);
  bias_input_ = mean_square_norm_ > 0.0 ? std::sqrt(mean_square_norm_) : 1.0;
  const double bias_sq = bias_input_ * bias_input_;
  gram_.resize(count * count);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i; j < count; ++j) {
      const double g = dot(samples_[i].values(), samples_[j].values()) + bias_sq;
      gram_[i * count + j] = g;
      gram_[j * count + i] = g;
    }
  }
}

namespace {

struct PocketScore {
  std::size_t errors;
  std::size_t violations;
  bool operator<(const PocketScore& o) const {
    return errors != o.errors ? errors < o.errors : violations < o.violations;
  }
};

}  // namespace

LinearDiscriminant train_bit(const TrainingSet& set, std::span<const std::uint8_t> targets,
                             const PerceptronOptions& options) {
  if (options.max_epochs < 1) fail(ErrorKind::domain, "max_epochs must be at least 1");
  if (!(options.learning_rate > 0.0)) fail(ErrorKind::domain, "learning rate must be positive");
  if (!(options.margin >= 0.0)) fail(ErrorKind::domain, "margin must be non-negative");
  const std::size_t count = set.size();
  if (targets.size() != count) fail(ErrorKind::dimension, "one target per training sample required");

  const double gamma = options.margin * set.mean_square_norm();
  std::vector<double> sign(count);
  for (std::size_t i = 0; i < count; ++i) sign[i] = targets[i] ? 1.0 : -1.0;

  // Dual form: w = sum alpha_i x_i, bias = sum alpha_i s^2. Each update adds
  // eta * (t - y) = 2 * eta * t to one coefficient, so activations can be
  // refreshed in O(count) from the Gram matrix.
  std::vector<double> alpha(count, 0.0);
  std::vector<double> act(count, 0.0);
  const auto score = [&] {
    PocketScore s{0, 0};
    for (std::size_t j = 0; j < count; ++j) {
      const bool predicted = act[j] >= 0.0;
      if (predicted != (targets[j] != 0)) ++s.errors;
      if (sign[j] * act[j] <= gamma) ++s.violations;
    }
    return s;
  };
  std::vector<double> pocket = alpha;
  PocketScore best = score();

  for (std::size_t epoch = 0; epoch < options.max_epochs && best.violations > 0; ++epoch) {
    bool updated = false;
    for (std::size_t i = 0; i < count; ++i) {
      if (sign[i] * act[i] > gamma && (act[i] >= 0.0) == (targets[i] != 0)) continue;
      const double step = 2.0 * options.learning_rate * sign[i];
      alpha[i] += step;
      for (std::size_t j = 0; j < count; ++j) act[j] += step * set.gram(i, j);
      updated = true;
      const PocketScore now = score();
      if (now < best) {
        best = now;
        pocket = alpha;
      }
    }
    if (!updated) break;
  }

  LinearDiscriminant f;
  f.weights.assign(set.dimension(), 0.0);
  const double bias_sq = set.bias_input() * set.bias_input();
  for (std::size_t i = 0; i < count; ++i) {
    if (pocket[i] == 0.0) continue;
    const auto x = set.sample(i).values();
    for (std::size_t d = 0; d < x.size(); ++d) f.weights[d] += pocket[i] * x[d];
    f.bias += pocket[i] * bias_sq;
  }
  return f;
}

LinearDiscriminant train_bit(std::span<const CancelableTemplate> samples,
                             std::span<const std::uint8_t> targets, const PerceptronOptions& options) {
  return train_bit(TrainingSet({samples.begin(), samples.end()}), targets, options);
}

std::size_t training_errors(const LinearDiscriminant& f, std::span<const CancelableTemplate> samples,
                            std::span<const std::uint8_t> targets) {
  std::size_t errors = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (f.decide(samples[i].values()) != (targets[i] != 0)) ++errors;
  }
  return errors;
}

BDAModel::BDAModel(Matrix weights, std::vector<double> biases)
    : weights_(std::move(weights)), biases_(std::move(biases)) {
  if (weights_.rows() == 0 || weights_.cols() == 0) fail(ErrorKind::domain, "empty discriminant model");
  if (biases_.size() != weights_.rows()) fail(ErrorKind::dimension, "one bias per discriminant required");
  for (double w : weights_.data()) {
    if (!std::isfinite(w)) fail(ErrorKind::domain, "non-finite model weight");
  }
  for (double b : biases_) {
    if (!std::isfinite(b)) fail(ErrorKind::domain, "non-finite model bias");
  }
}

LinearDiscriminant BDAModel::function(std::size_t bit) const {
  const auto row = weights_.row(bit);
  return {{row.begin(), row.end()}, biases_[bit]};
}

BDAModel train_bda(const ClassTemplates& classes, const TargetCodebook& codebook,
                   const PerceptronOptions& options, unsigned threads) {
  if (classes.size() != codebook.codewords.size()) {
    fail(ErrorKind::structural, std::to_string(classes.size()) + " classes but " +
                                    std::to_string(codebook.codewords.size()) + " codewords");
  }
  std::vector<CancelableTemplate> samples;
  std::vector<std::size_t> owner;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (classes[c].empty()) fail(ErrorKind::structural, "class " + std::to_string(c) + " has no samples");
    for (const auto& s : classes[c]) {
      samples.push_back(s);
      owner.push_back(c);
    }
  }
  const TrainingSet set(std::move(samples));
  const std::size_t n = codebook.bits;
  const std::size_t dim = set.dimension();

  Matrix weights(n, dim);
  std::vector<double> biases(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    std::vector<std::uint8_t> targets(owner.size());
    for (std::size_t bit = next++; bit < n; bit = next++) {
      for (std::size_t i = 0; i < owner.size(); ++i) targets[i] = codebook.codewords[owner[i]].get(bit);
      const LinearDiscriminant f = train_bit(set, targets, options);
      for (std::size_t d = 0; d < dim; ++d) weights(bit, d) = f.weights[d];
      biases[bit] = f.bias;
    }
  };

  unsigned count = threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : threads;
  count = static_cast<unsigned>(std::min<std::size_t>(count, n));
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  return BDAModel(std::move(weights), std::move(biases));
}

BitString binarize(const CancelableTemplate& x, const BDAModel& model) {
  if (x.size() != model.dimension()) {
    fail(ErrorKind::dimension, "template length " + std::to_string(x.size()) +
                                   " does not match model dimension " +
                                   std::to_string(model.dimension()));
  }
  BitString out(model.bits());
  for (std::size_t j = 0; j < model.bits(); ++j) {
    out.set(j, dot(model.weights().row(j), x.values()) + model.biases()[j] >= 0.0);
  }
  return out;
}

BitString threshold_binarize(const CancelableTemplate& x, std::size_t n) {
  if (n > x.size()) fail(ErrorKind::dimension, "threshold binarizer needs n <= template length");
  BitString out(n);
  for (std::size_t j = 0; j < n; ++j) out.set(j, x[j] >= 0.0);
  return out;
}

std::size_t hamming_similarity(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) fail(ErrorKind::dimension, "templates differ in length");
  return a.size() - hamming_distance(a, b);
}

BitString majority_vote(std::span<const BitString> templates) {
  if (templates.empty()) fail(ErrorKind::domain, "majority vote over no templates");
  const std::size_t n = templates.front().size();
  BitString out(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t ones = 0;
    for (const auto& t : templates) {
      if (t.size() != n) fail(ErrorKind::dimension, "templates differ in length");
      ones += t.get(j);
    }
    out.set(j, 2 * ones >= templates.size());
  }
  return out;
}

}  // namespace bioprot
