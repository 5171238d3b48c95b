#include "bioprot/linalg.hpp"

#include <cmath>
#include <string>

#include "bioprot/error.hpp"
#include "bioprot/rng.hpp"

namespace bioprot {

template <class Tag>
RealVector<Tag>::RealVector(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      fail(ErrorKind::domain, "non-finite entry at index " + std::to_string(i));
    }
  }
}

template class RealVector<FeatureTag>;
template class RealVector<CancelableTag>;

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    fail(ErrorKind::dimension, "matrix data size does not match shape");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_columns(const std::vector<std::vector<double>>& columns) {
  if (columns.empty()) return {};
  const std::size_t rows = columns.front().size();
  Matrix m(rows, columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].size() != rows) fail(ErrorKind::dimension, "ragged columns");
    for (std::size_t r = 0; r < rows; ++r) m(r, c) = columns[c][r];
  }
  return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

ProjectionMatrix::ProjectionMatrix(std::uint64_t seed, Matrix columns)
    : seed_(seed), q_(std::move(columns)) {
  if (q_.cols() == 0 || q_.rows() == 0) fail(ErrorKind::domain, "empty projection matrix");
  if (q_.cols() > q_.rows()) fail(ErrorKind::dimension, "projection must not increase dimension");
}

Matrix gram_schmidt(const Matrix& m) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  // Work column-major so each column is contiguous.
  std::vector<std::vector<double>> q(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    std::vector<double> v = m.column(j);
    for (std::size_t i = 0; i < j; ++i) {
      const double r = dot(q[i], v);
      for (std::size_t k = 0; k < rows; ++k) v[k] -= r * q[i][k];
    }
    const double len = norm(v);
    if (!(len >= rank_tolerance)) {
      fail(ErrorKind::rank_deficiency,
           "column " + std::to_string(j + 1) + " is linearly dependent on earlier columns");
    }
    for (double& x : v) x /= len;
    q[j] = std::move(v);
  }
  return Matrix::from_columns(q);
}

ProjectionMatrix generate_projection_matrix(std::uint64_t seed, std::size_t l, std::size_t l_r) {
  if (l == 0 || l_r == 0) fail(ErrorKind::domain, "projection dimensions must be positive");
  if (l_r > l) {
    fail(ErrorKind::dimension, "l_r (" + std::to_string(l_r) + ") exceeds l (" +
                                   std::to_string(l) + ")");
  }
  const CounterRng rng(seed);
  Matrix raw(l, l_r);
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < l_r; ++j) raw(i, j) = rng.normal_at(i * l_r + j);
  }
  return ProjectionMatrix(seed, gram_schmidt(raw));
}

CancelableTemplate project(const FeatureVector& x, const ProjectionMatrix& m) {
  const Matrix& q = m.matrix();
  if (x.size() != q.rows()) {
    fail(ErrorKind::dimension, "feature length " + std::to_string(x.size()) +
                                   " does not match projection input " +
                                   std::to_string(q.rows()));
  }
  std::vector<double> out(q.cols(), 0.0);
  for (std::size_t i = 0; i < q.rows(); ++i) {
    const double xi = x[i];
    const auto row = q.row(i);
    for (std::size_t j = 0; j < q.cols(); ++j) out[j] += xi * row[j];
  }
  return CancelableTemplate(std::move(out));
}

std::vector<double> lift(std::span<const double> y, const ProjectionMatrix& m) {
  const Matrix& q = m.matrix();
  if (y.size() != q.cols()) fail(ErrorKind::dimension, "lift length mismatch");
  std::vector<double> out(q.rows());
  for (std::size_t i = 0; i < q.rows(); ++i) out[i] = dot(q.row(i), y);
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::dimension, "dot product length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::dimension, "cosine similarity length mismatch");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) fail(ErrorKind::domain, "cosine similarity of a zero vector");
  const double c = dot(a, b) / (na * nb);
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

double orthonormality_error(const Matrix& q) {
  double worst = 0.0;
  for (std::size_t i = 0; i < q.cols(); ++i) {
    const auto ci = q.column(i);
    for (std::size_t j = i; j < q.cols(); ++j) {
      const double d = dot(ci, q.column(j)) - (i == j ? 1.0 : 0.0);
      worst = std::max(worst, std::abs(d));
    }
  }
  return worst;
}

}  // namespace bioprot
