#include <doctest.h>

#include <cmath>

#include "bioprot/error.hpp"
#include "bioprot/linalg.hpp"
#include "bioprot/rng.hpp"

using namespace bioprot;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::budget;
}

}  // namespace

TEST_CASE("gram-schmidt hand example") {
  const Matrix q = gram_schmidt(Matrix::from_columns({{3, 4}, {1, 0}}));
  CHECK(q(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(q(1, 0) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(q(0, 1) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(q(1, 1) == doctest::Approx(-0.6).epsilon(1e-12));
}

TEST_CASE("gram-schmidt keeps the identity") {
  CHECK(gram_schmidt(Matrix::identity(3)) == Matrix::identity(3));
}

TEST_CASE("dependent columns are reported by position") {
  try {
    gram_schmidt(Matrix::from_columns({{1, 0}, {2, 0}}));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::rank_deficiency);
    CHECK(std::string(e.what()).find("column 2") != std::string::npos);
  }
}

TEST_CASE("projection matrix") {
  SUBCASE("1x1 normalizes to a sign") {
    const auto p = generate_projection_matrix(7, 1, 1);
    CHECK(std::abs(p.matrix()(0, 0)) == doctest::Approx(1.0));
  }
  SUBCASE("orthonormal and reproducible") {
    const auto a = generate_projection_matrix(42, 8, 4);
    const auto b = generate_projection_matrix(42, 8, 4);
    CHECK(orthonormality_error(a.matrix()) <= 1e-9);
    CHECK(a.matrix() == b.matrix());
    CHECK(a.matrix() != generate_projection_matrix(43, 8, 4).matrix());
  }
  SUBCASE("entries follow the normal stream before orthonormalization") {
    // First column is the normalized first column of the raw draw.
    const CounterRng rng(42);
    const auto p = generate_projection_matrix(42, 8, 4);
    double n0 = 0;
    for (std::size_t i = 0; i < 8; ++i) n0 += rng.normal_at(i * 4) * rng.normal_at(i * 4);
    n0 = std::sqrt(n0);
    for (std::size_t i = 0; i < 8; ++i) CHECK(p.matrix()(i, 0) == doctest::Approx(rng.normal_at(i * 4) / n0));
  }
  SUBCASE("bad shapes") {
    CHECK(kind_of([] { generate_projection_matrix(1, 4, 8); }) == ErrorKind::dimension);
    CHECK(kind_of([] { generate_projection_matrix(1, 0, 0); }) == ErrorKind::domain);
    CHECK(kind_of([] { generate_projection_matrix(1, 4, 0); }) == ErrorKind::domain);
  }
}

TEST_CASE("project") {
  const ProjectionMatrix id(0, Matrix::identity(2));
  CHECK(project(FeatureVector({1, 0}), id).vector() == std::vector<double>{1, 0});

  const auto p = generate_projection_matrix(9, 16, 8);
  CHECK(project(FeatureVector(std::vector<double>(16, 0.0)), p).vector() == std::vector<double>(8, 0.0));

  const CounterRng rng(77);
  std::vector<double> x(16);
  for (std::size_t i = 0; i < 16; ++i) x[i] = rng.normal_at(i);
  const auto y = project(FeatureVector(x), p);
  for (std::size_t j = 0; j < 8; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < 16; ++i) s += p.matrix()(i, j) * x[i];
    CHECK(y[j] == doctest::Approx(s).epsilon(1e-12));
  }
  CHECK(kind_of([&] { project(FeatureVector({1, 2, 3}), p); }) == ErrorKind::dimension);
}

TEST_CASE("lift inverts project on the column space") {
  const auto p = generate_projection_matrix(3, 12, 5);
  const std::vector<double> y{0.5, -1, 2, 0.25, 3};
  const auto x = lift(y, p);
  const auto back = project(FeatureVector(x), p);
  for (std::size_t j = 0; j < y.size(); ++j) CHECK(back[j] == doctest::Approx(y[j]));
}

TEST_CASE("cosine similarity") {
  const std::vector<double> e1{1, 0}, e2{0, 1}, d{1, 1}, z{0, 0};
  CHECK(cosine_similarity(e1, e1) == doctest::Approx(1.0));
  CHECK(cosine_similarity(e1, e2) == doctest::Approx(0.0));
  CHECK(std::abs(cosine_similarity(d, e1) - 0.70710678118654752) < 1e-9);
  CHECK(kind_of([&] { cosine_similarity(z, e1); }) == ErrorKind::domain);
  CHECK(kind_of([&] { cosine_similarity(e1, std::vector<double>{1, 2, 3}); }) == ErrorKind::dimension);
}

TEST_CASE("feature vectors reject non-finite entries") {
  CHECK(kind_of([] { FeatureVector({1.0, NAN}); }) == ErrorKind::domain);
  CHECK(kind_of([] { FeatureVector({INFINITY}); }) == ErrorKind::domain);
}
