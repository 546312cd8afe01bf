#include <doctest.h>

#include <cmath>

#include "featadapt/arbitrary_rep.hpp"
#include "featadapt/errors.hpp"
#include "featadapt/synth.hpp"
#include "helpers.hpp"

using namespace featadapt;

namespace {

// Distance from p to span(F) by dense least squares.
double dist_oracle(const Vector& p, const Matrix& F) {
  if (F.cols() == 0) return p.norm();
  const Vector z = F.completeOrthogonalDecomposition().solve(p);
  return (p - F * z).norm();
}

Matrix design(int m, int n, std::uint64_t seed) {
  const SymMatrix s = random_covariance(n, 10.0, seed);
  return sample_gaussian(s, m, 0.0, Vector::Zero(n), seed + 1).X;
}

}  // namespace

TEST_CASE("balanced_groups") {
  for (int n : {1, 2, 4, 5, 10, 17, 20, 101}) {
    const auto g = balanced_groups(n);
    CHECK(static_cast<int>(g.size()) == static_cast<int>(std::ceil(std::sqrt(n))));
    std::size_t lo = n, hi = 0;
    int next = 0;
    for (const auto& grp : g) {
      lo = std::min(lo, grp.size());
      hi = std::max(hi, grp.size());
      for (int i : grp) CHECK(i == next++);
    }
    CHECK(next == n);
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("nearest_subspace_index matches a least-squares scan") {
  const Matrix pts = testutil::gaussian_matrix(6, 8, 3);
  const Matrix span = testutil::gaussian_matrix(6, 2, 4);
  const NearestResult r = nearest_subspace_index(pts, span);
  int best = -1;
  double bd = 1e300;
  for (int i = 0; i < 8; ++i) {
    const double d = dist_oracle(pts.col(i), span);
    if (d < bd) bd = d, best = i;
  }
  CHECK(r.index == best);
  CHECK(r.distance == doctest::Approx(bd).epsilon(1e-9));

  Matrix tie = Matrix::Identity(3, 3);
  const NearestResult t = nearest_subspace_index(tie, Matrix(3, 0));
  CHECK(t.index == 0);
  CHECK(t.distance == doctest::Approx(1.0));
  tie.col(2) = Vector::Unit(3, 0);
  CHECK(nearest_subspace_index(tie, tie.col(2)).index == 0);
}

TEST_CASE("represented vector count") {
  CHECK(represent_vectors_count(balanced_groups(4), 4, 2) == 24);
  CHECK(represent_vectors_count(balanced_groups(20), 20, 2) == 260);
  // t = 3, n = 9: 3 C(9,2) + 3 * 27 * C(9,1).
  CHECK(represent_vectors_count(balanced_groups(9), 9, 3) == 3 * 36 + 3 * 27 * 9);
  const ColumnGeometry g = column_geometry(design(40, 9, 5));
  const RepresentedVectors rv = represent_vectors(g.points, g.groups, 2);
  CHECK(static_cast<std::uint64_t>(rv.coeffs.cols()) == represent_vectors_count(g.groups, 9, 2));
  CHECK_THROWS_AS(represent_vectors(g.points, g.groups, 2, 10), BudgetError);
}

TEST_CASE("represented vectors: projection atoms and orthonormal blocks") {
  const int n = 9, t = 2;
  const ColumnGeometry g = column_geometry(design(60, n, 7));
  for (int i = 0; i < n; ++i) CHECK(g.points.col(i).norm() == doctest::Approx(1.0));
  const RepresentedVectors rv = represent_vectors(g.points, g.groups, t);
  const Matrix img = g.points * rv.coeffs;
  int c = 0;
  while (c < rv.coeffs.cols()) {
    if (rv.is_projection[c]) {
      // gamma - e_h: exactly one coefficient equal to -1 inside the group.
      int minus_one = 0;
      for (int i : g.groups[rv.group[c]]) minus_one += rv.coeffs(i, c) == -1.0;
      CHECK(minus_one <= 1);
      ++c;
      continue;
    }
    const Matrix blk = img.middleCols(c, t);
    for (int a = 0; a < t; ++a) {
      const double na = blk.col(a).norm();
      CHECK((na == doctest::Approx(1.0).epsilon(1e-8) || na == 0.0));
      for (int b = a + 1; b < t; ++b) CHECK(std::abs(blk.col(a).dot(blk.col(b))) <= 1e-8);
    }
    c += t;
  }
}

TEST_CASE("representation cost is calibrated on sparse vectors") {
  const int n = 9, t = 2;
  PlantedDependency dep;
  dep.support = {1, 4};
  dep.coefficients = Vector::Ones(2);
  dep.residual_variance = 1e-4;
  const PlantedInstance inst = gen_planted_dependencies(n, {dep}, 1.0);
  const Matrix X = sample_gaussian(inst.sigma, 200, 0.0, Vector::Zero(n), 11).X;
  const ColumnGeometry g = column_geometry(X);
  const RepresentedVectors rv = represent_vectors(g.points, g.groups, t);
  const Vector w = image_norms(g.points, rv.coeffs);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x = random_sparse_vector(n, t, 300 + trial);
    if (trial == 0) x = Vector::Unit(n, 1) - Vector::Unit(n, 4);
    const double target = (g.points * x).norm();
    const CostResult c = representation_cost(rv.coeffs, w, x);
    CHECK(c.cost <= 40.0 * std::pow(t, 1.5) * std::log(n) * target);
  }
}

TEST_CASE("empirical covariance is two-sided on sparse vectors") {
  const int n = 10, t = 2;
  const SymMatrix s = random_covariance(n, 20.0, 13);
  const int m = static_cast<int>(std::ceil(100 * t * std::log(n)));
  const Matrix X = sample_gaussian(s, m, 0.0, Vector::Zero(n), 14).X;
  const Matrix hat = X.transpose() * X / m;
  for (int trial = 0; trial < 200; ++trial) {
    const Vector v = random_sparse_vector(n, t, 500 + trial);
    const double r = v.dot(hat * v) / sigma_norm_sq(s, v);
    CHECK(r >= 0.5);
    CHECK(r <= 2.0);
  }
}

TEST_CASE("compute_l1_representation") {
  const Matrix X = design(500, 10, 17);
  L1RepConfig cfg;
  const Dictionary d = compute_l1_representation(X, cfg);
  CHECK(d.provenance == Provenance::ArbitraryRep);
  CHECK(d.dim() == 10);
  CHECK(static_cast<std::uint64_t>(d.size()) == represent_vectors_count(balanced_groups(10), 10, 2));
  const Matrix hat = X.transpose() * X / 500.0;
  for (int k = 0; k < d.size(); k += 7) {
    CHECK(d.sigma_norms(k) == doctest::Approx(std::sqrt(std::max(0.0, d.atoms.col(k).dot(hat * d.atoms.col(k))))));
  }
  CHECK_THROWS_AS(compute_l1_representation(design(100, 10, 18), cfg), ValidationError);
  cfg.t = 5;
  CHECK_THROWS_AS(compute_l1_representation(X, cfg), ValidationError);

  Matrix z = X;
  z.col(3).setZero();
  L1RepConfig c2;
  const Dictionary dz = compute_l1_representation(z, c2);
  CHECK(dz.atoms.row(3).isZero());
}

TEST_CASE("classify_rep_case") {
  SUBCASE("orthogonal columns take the far branch") {
    const ColumnGeometry g = column_geometry(Matrix::Identity(4, 4));
    Vector x = Vector::Zero(4);
    x(0) = 1;
    x(2) = 1;
    const RepCaseReport r = classify_rep_case(g, x);
    CHECK(r.branch == RepCase::ProjectionFar);
    CHECK(r.pivot == 0);
    CHECK(r.distance == doctest::Approx(1.0));
  }
  SUBCASE("a duplicated column takes the near branch") {
    Matrix X = Matrix::Identity(4, 4);
    X.col(2) = X.col(1);
    const ColumnGeometry g = column_geometry(X);
    Vector x = Vector::Zero(4);
    x(0) = 2;
    x(2) = 1;
    const RepCaseReport r = classify_rep_case(g, x);
    CHECK(r.branch == RepCase::ProjectionNear);
    CHECK(r.pivot == 0);
    CHECK(r.nearest == 1);
    CHECK(r.distance == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("errors") {
    const ColumnGeometry g = column_geometry(Matrix::Identity(4, 4));
    CHECK_THROWS_AS(classify_rep_case(g, Vector::Zero(4)), ValidationError);
    CHECK_THROWS_AS(classify_rep_case(g, Vector::Ones(3)), ValidationError);
  }
}

TEST_CASE("slr_arbitrary on an identity covariance") {
  const int n = 10;
  Vector v = Vector::Zero(n);
  v(2) = 1;
  v(7) = -1;
  const SampleSet s = sample_gaussian(SymMatrix::identity(n), 2000, 0.0, v, 21);
  SlrConfig cfg;
  cfg.B = std::sqrt(2.0);
  const SlrResult r = slr_arbitrary(s, cfg);
  CHECK(r.report.method == "slr");
  CHECK(r.dictionary_samples == static_cast<int>(std::ceil(200 * std::log(n))));
  CHECK(r.l1_budget == doctest::Approx(2 * 4.0 * std::pow(2.0, 1.5) * std::sqrt(2.0) * std::log(n)));
  CHECK(r.report.v_hat.size() == n);
  CHECK((r.report.v_hat - v).squaredNorm() <= 0.25 * v.squaredNorm());
  CHECK_THROWS_AS(slr_arbitrary(s.slice(0, 500), cfg), ValidationError);
}
