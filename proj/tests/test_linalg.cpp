#include <doctest.h>

#include <cmath>

#include "featadapt/errors.hpp"
#include "featadapt/linalg.hpp"
#include "helpers.hpp"

using namespace featadapt;

TEST_CASE("SymMatrix rejects asymmetric and non-square input") {
  Matrix a(2, 2);
  a << 1, 2, 2.1, 1;
  CHECK_THROWS_AS(SymMatrix{a}, ValidationError);
  CHECK_THROWS_AS(SymMatrix{Matrix(2, 3)}, ValidationError);
  a(1, 0) = 2.0 + 1e-14;
  CHECK_NOTHROW(SymMatrix{a});
}

TEST_CASE("PSD flag tolerates tiny negative eigenvalues only") {
  Matrix a(2, 2);
  a << 1, 1, 1, 1;
  CHECK(SymMatrix(a).is_psd());
  a << 1, 0, 0, -1e-3;
  CHECK_FALSE(SymMatrix(a).is_psd());
  CHECK_THROWS_AS(SymMatrix(a).require_psd(), ValidationError);
}

TEST_CASE("eig on analytic cases") {
  SUBCASE("identity") {
    const EigenDecomp e = eig(SymMatrix::identity(3));
    CHECK((e.values - Vector::Ones(3)).norm() < 1e-14);
  }
  SUBCASE("diag(4,1) ascending with matching vectors") {
    Vector d(2);
    d << 4, 1;
    const EigenDecomp e = eig(SymMatrix::diagonal(d));
    CHECK(e.values(0) == doctest::Approx(1.0));
    CHECK(e.values(1) == doctest::Approx(4.0));
    CHECK(std::abs(e.vectors(1, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(e.vectors(0, 1)) == doctest::Approx(1.0));
    CHECK(e.lambda(1) == e.values(0));
  }
  SUBCASE("rank one (e1+e2)(e1+e2)^T") {
    Matrix a = Matrix::Ones(2, 2);
    const EigenDecomp e = eig(SymMatrix(a));
    CHECK(std::abs(e.values(0)) < 1e-14);
    CHECK(e.values(1) == doctest::Approx(2.0));
    CHECK(std::abs(e.vectors(0, 1)) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(std::abs(e.vectors(1, 1)) == doctest::Approx(1 / std::sqrt(2.0)));
  }
}

TEST_CASE("eig invariants on random PSD matrices") {
  for (int n : {1, 5, 17, 50}) {
    const SymMatrix s = testutil::random_psd(n, n, 100 + n);
    const EigenDecomp e = eig(s);
    CHECK((s.matrix() - e.reconstruct()).norm() <= 1e-8 * std::max(1.0, s.matrix().norm()));
    CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(n, n)).norm() <= 1e-8);
    for (int i = 0; i + 1 < n; ++i) CHECK(e.values(i) <= e.values(i + 1));
    // Trace and determinant-free oracle: eigenvalue sum equals the trace.
    CHECK(e.values.sum() == doctest::Approx(s.matrix().trace()).epsilon(1e-10));
  }
}

TEST_CASE("sigma_inner and sigma_norm") {
  Vector e1 = Vector::Unit(2, 0);
  CHECK(sigma_inner(SymMatrix::identity(2), e1, e1) == 1.0);
  Vector d(2);
  d << 2, 3;
  Vector u(2), v(2);
  u << 1, 1;
  v << 1, -1;
  CHECK(sigma_inner(SymMatrix::diagonal(d), u, v) == doctest::Approx(-1.0));
  // Projection off (e1+e2)/sqrt2.
  Matrix p(2, 2);
  p << 0.5, -0.5, -0.5, 0.5;
  CHECK(sigma_norm(SymMatrix(p), u) == 0.0);
  CHECK_THROWS_AS(sigma_inner(SymMatrix::identity(3), u, v), ValidationError);
  Matrix neg(1, 1);
  neg << -1;
  CHECK_THROWS_AS(sigma_norm(SymMatrix(neg), Vector::Ones(1)), ValidationError);
  neg << -1e-13;
  CHECK(sigma_norm(SymMatrix(neg), Vector::Ones(1)) == 0.0);
}

TEST_CASE("projection_top") {
  const SymMatrix s = testutil::random_psd(4, 4, 7);
  const EigenDecomp e = eig(s);
  CHECK((projection_top(e, 0).matrix() - Matrix::Identity(4, 4)).norm() < 1e-12);
  CHECK(projection_top(e, 4).matrix().norm() < 1e-12);
  CHECK_THROWS_AS(projection_top(e, 5), ValidationError);
  CHECK_THROWS_AS(projection_top(e, -1), ValidationError);

  Matrix k(2, 2);
  k << 0.5, -0.5, -0.5, 0.5;
  const SymMatrix p = projection_top(eig(SymMatrix(k)), 1);
  CHECK((p.matrix() - k).norm() < 1e-12);

  for (int d = 0; d <= 4; ++d) {
    const Matrix pd = projection_top(e, d).matrix();
    CHECK((pd * pd - pd).norm() < 1e-8);
    if (d < 4) {
      // lambda_{d+1} P <= Sigma.
      CHECK(min_eigenvalue(s.matrix() - e.values(d) * pd) >= -1e-8 * e.values(3));
    }
  }
}

TEST_CASE("gram_schmidt_general") {
  std::vector<Vector> vs{Vector::Unit(2, 0), Vector::Unit(2, 1)};
  GramSchmidtResult g = gram_schmidt_general(vs, euclidean_inner());
  CHECK((g.coeffs[0] - Vector::Unit(2, 0)).norm() < 1e-14);
  CHECK((g.coeffs[1] - Vector::Unit(2, 1)).norm() < 1e-14);

  vs[1] = Vector::Ones(2);
  g = gram_schmidt_general(vs, euclidean_inner());
  Vector expect(2);
  expect << -1, 1;
  CHECK((g.coeffs[1] - expect).norm() < 1e-12);

  Matrix w(2, 2);
  w << 1, 0.5, 0.5, 1;
  vs[1] = Vector::Unit(2, 1);
  g = gram_schmidt_general(vs, matrix_inner(w));
  const Vector a = g.coeffs[0], b = g.coeffs[1];
  CHECK(std::abs(a.dot(w * b)) <= 1e-10);
  CHECK(a.dot(w * a) == doctest::Approx(1.0));
  CHECK(b.dot(w * b) == doctest::Approx(1.0));

  CHECK_THROWS_AS(gram_schmidt_general({}, euclidean_inner()), ValidationError);
  Matrix bad(1, 1);
  bad << -1;
  CHECK_THROWS_AS(gram_schmidt_general({Vector::Ones(1)}, matrix_inner(bad)), ValidationError);
}

TEST_CASE("gram_schmidt_general skips dependent inputs") {
  std::vector<Vector> vs{Vector::Unit(3, 0), 2 * Vector::Unit(3, 0), Vector::Unit(3, 2)};
  const GramSchmidtResult g = gram_schmidt_general(vs, euclidean_inner());
  CHECK(g.rank() == 2);
  CHECK(g.nonzero[0]);
  CHECK_FALSE(g.nonzero[1]);
  CHECK(g.nonzero[2]);
}

TEST_CASE("gram_schmidt images are orthonormal or zero on random inputs") {
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + trial % 5;
    const Matrix v = testutil::gaussian_matrix(6, k, 300 + trial);
    const SymMatrix s = testutil::random_psd(6, 6, 400 + trial);
    std::vector<Vector> vs;
    for (int i = 0; i < k; ++i) vs.emplace_back(v.col(i));
    const GramSchmidtResult g = gram_schmidt_general(vs, matrix_inner(s.matrix()));
    std::vector<Vector> images;
    for (int i = 0; i < k; ++i) images.push_back(v * g.coeffs[i]);
    for (int i = 0; i < k; ++i) {
      const double self = sigma_inner(s, images[i], images[i]);
      CHECK((std::abs(self) <= 1e-8 || std::abs(self - 1) <= 1e-8));
      for (int j = 0; j < i; ++j) CHECK(std::abs(sigma_inner(s, images[i], images[j])) <= 1e-8);
    }
  }
}

TEST_CASE("sample_gaussian") {
  SUBCASE("zero covariance gives zero design") {
    const SampleSet s = sample_gaussian(SymMatrix(Matrix::Zero(3, 3)), 50, 1.0, Vector::Ones(3), 5);
    CHECK(s.X.norm() == 0.0);
    CHECK(s.y.norm() > 0.0);
  }
  SUBCASE("empirical covariance converges") {
    const SampleSet s = sample_gaussian(SymMatrix::identity(2), 100000, 0.0, Vector::Zero(2), 11);
    const Matrix emp = s.X.transpose() * s.X / s.m();
    CHECK((emp - Matrix::Identity(2, 2)).norm() <= 0.05);
  }
  SUBCASE("deterministic and noiseless") {
    const SymMatrix sig = testutil::random_psd(4, 2, 9);
    const Vector v = testutil::gaussian_vector(4, 10);
    const SampleSet a = sample_gaussian(sig, 30, 0.0, v, 77);
    const SampleSet b = sample_gaussian(sig, 30, 0.0, v, 77);
    CHECK(a.X == b.X);
    CHECK(a.y == b.y);
    CHECK((a.X * v - a.y).norm() == 0.0);
    CHECK(a.seed == 77);
  }
  SUBCASE("rank-deficient covariance keeps samples in its range") {
    Matrix p(2, 2);
    p << 0.5, -0.5, -0.5, 0.5;
    const SampleSet s = sample_gaussian(SymMatrix(p), 100, 0.0, Vector::Zero(2), 3);
    CHECK((s.X * Vector::Ones(2)).norm() < 1e-10);
  }
  SUBCASE("errors") {
    Matrix neg(1, 1);
    neg << -1;
    CHECK_THROWS_AS(sample_gaussian(SymMatrix(neg), 3, 0.0, Vector::Zero(1), 1), ValidationError);
    CHECK_THROWS_AS(sample_gaussian(SymMatrix::identity(2), 3, 0.0, Vector::Zero(3), 1), ValidationError);
  }
}

TEST_CASE("SampleSet validation and slicing") {
  SampleSet s;
  s.X = Matrix::Ones(4, 2);
  s.y = Vector::LinSpaced(4, 0, 3);
  CHECK_NOTHROW(s.validate());
  const SampleSet t = s.slice(1, 2);
  CHECK(t.m() == 2);
  CHECK(t.y(0) == 1.0);
  CHECK_THROWS_AS(s.slice(3, 2), ValidationError);
  s.y = Vector::Ones(3);
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.y = Vector::Ones(4);
  s.X(0, 0) = std::nan("");
  CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("index-set helpers and seed mixing") {
  CHECK(set_union({0, 2}, {1, 2}) == IndexSet{0, 1, 2});
  CHECK(set_complement({1, 3}, 5) == IndexSet{0, 2, 4});
  CHECK(is_subset({1}, {0, 1}));
  CHECK_FALSE(is_subset({4}, {0, 1}));
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
}
