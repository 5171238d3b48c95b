#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bioprot {

/// Finite real vector tagged with its pipeline role.
template <class Tag>
class RealVector {
 public:
  RealVector() = default;
  /// Throws a domain error if any entry is NaN or infinite.
  explicit RealVector(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }

  friend bool operator==(const RealVector&, const RealVector&) = default;

 private:
  std::vector<double> values_;
};

struct FeatureTag;
struct CancelableTag;
using FeatureVector = RealVector<FeatureTag>;
using CancelableTemplate = RealVector<CancelableTag>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  /// Builds a matrix from column vectors of equal length.
  static Matrix from_columns(const std::vector<std::vector<double>>& columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::vector<double> column(std::size_t c) const;
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// l x l_r matrix with orthonormal columns, regenerable from (seed, l, l_r).
class ProjectionMatrix {
 public:
  ProjectionMatrix(std::uint64_t seed, Matrix columns);

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t input_length() const noexcept { return q_.rows(); }
  std::size_t output_length() const noexcept { return q_.cols(); }
  const Matrix& matrix() const noexcept { return q_; }

 private:
  std::uint64_t seed_;
  Matrix q_;
};

/// Residual norm below which gram_schmidt reports a dependent column.
inline constexpr double rank_tolerance = 1e-12;

/// Modified Gram-Schmidt on the columns. Throws rank_deficiency naming the
/// 1-based column whose residual collapses.
Matrix gram_schmidt(const Matrix& m);

/// Standard-normal entries from CounterRng(seed), entry (i, j) at normal
/// index i * l_r + j, then orthonormalized.
ProjectionMatrix generate_projection_matrix(std::uint64_t seed, std::size_t l, std::size_t l_r);

CancelableTemplate project(const FeatureVector& x, const ProjectionMatrix& m);

/// Maps cancelable coordinates back into feature space (Q y).
std::vector<double> lift(std::span<const double> y, const ProjectionMatrix& m);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// max over i, j of |(Q^T Q)_ij - delta_ij|.
double orthonormality_error(const Matrix& q);

}  // namespace bioprot
