#include <doctest.h>

#include <cmath>
#include <limits>

#include "featadapt/boosting.hpp"
#include "featadapt/errors.hpp"
#include "featadapt/solvers.hpp"
#include "helpers.hpp"

using namespace featadapt;

TEST_CASE("basis_pursuit examples") {
  SUBCASE("identity design") {
    const Vector y = testutil::gaussian_vector(4, 1);
    const FitReport r = basis_pursuit(Matrix::Identity(4, 4), y);
    CHECK((r.v_hat - y).norm() < 1e-8);
    CHECK(r.objective == doctest::Approx(y.lpNorm<1>()).epsilon(1e-8));
    CHECK(r.method == "bp");
  }
  SUBCASE("single constraint, unique optimum") {
    Matrix x(1, 2);
    x << 1, 2;
    const FitReport r = basis_pursuit(x, Vector::Constant(1, 2.0));
    CHECK(r.converged);
    CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(r.v_hat(0)) < 1e-6);
    CHECK(r.v_hat(1) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("exempt coordinate is free") {
    Matrix x(1, 2);
    x << 1, 1;
    const FitReport r = basis_pursuit(x, Vector::Ones(1), {0});
    CHECK(r.method == "adapted-bp");
    CHECK(std::abs(r.objective) < 1e-8);
    CHECK(r.v_hat(0) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("infeasible system") {
    Matrix x(2, 2);
    x << 1, 1, 1, 1;
    Vector y(2);
    y << 1, 2;
    CHECK_THROWS_AS(basis_pursuit(x, y), InfeasibleError);
  }
  SUBCASE("bad exempt index") { CHECK_THROWS_AS(basis_pursuit(Matrix::Identity(2, 2), Vector::Ones(2), {5}), ValidationError); }
}

TEST_CASE("basis_pursuit matches LP vertex enumeration") {
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + trial % 6;
    const int m = 1 + trial % std::min(4, n - 1);
    const Matrix a = testutil::gaussian_matrix(m, n, 1000 + trial);
    const Vector b = testutil::gaussian_vector(m, 2000 + trial);
    Vector w = Vector::Ones(n);
    if (trial % 3 == 0) w(trial % n) = 0.0;
    const FitReport r = weighted_basis_pursuit(a, b, w);
    const double oracle = testutil::lp_vertex_optimum(a, b, w);
    CHECK(r.objective == doctest::Approx(oracle).epsilon(1e-6));
    CHECK((a * r.v_hat - b).norm() <= 1e-8 * (1 + b.norm()));
  }
}

TEST_CASE("arlasso scalar closed form against a grid") {
  ArLassoParams p;
  p.delta = 0.1;
  const double L = std::log(12.0 / p.delta);
  p.lambda_high = 1.0 / (8.0 * L);  // 8 lambda L = 1, linear coefficient = 1
  const auto [a, c] = ar_lasso_coefficients(p, 1, 1.0);
  CHECK(a == doctest::Approx(1.0));
  CHECK(c == doctest::Approx(1.0));
  const FitReport r = adaptively_regularized_lasso(Matrix::Ones(1, 1), Vector::Ones(1), {}, p);
  double best_v = 0, best_f = std::numeric_limits<double>::infinity();
  for (int k = -200000; k <= 200000; ++k) {
    const double v = k * 1e-5;
    const double f = (v - 1) * (v - 1) + a * v * v + c * std::abs(v);
    if (f < best_f) {
      best_f = f;
      best_v = v;
    }
  }
  CHECK(r.v_hat(0) == doctest::Approx(std::max(0.0, (2 - c) / 4)).epsilon(1e-6));
  CHECK(std::abs(r.v_hat(0) - best_v) <= 1e-5);
  CHECK(r.objective == doctest::Approx(best_f).epsilon(1e-8));
}

TEST_CASE("arlasso structural cases") {
  const Matrix x = testutil::gaussian_matrix(8, 5, 3);
  ArLassoParams p;
  p.lambda_high = 0.5;
  SUBCASE("zero response") {
    const FitReport r = adaptively_regularized_lasso(x, Vector::Zero(8), {}, p);
    CHECK(r.v_hat.norm() < 1e-10);
    CHECK(std::abs(r.objective) < 1e-12);
  }
  SUBCASE("everything exempt gives minimum-norm least squares") {
    const Matrix wide = testutil::gaussian_matrix(3, 5, 4);
    const Vector y = testutil::gaussian_vector(3, 5);
    const FitReport r = adaptively_regularized_lasso(wide, y, {0, 1, 2, 3, 4}, p);
    const Vector ls = wide.completeOrthogonalDecomposition().solve(y);
    CHECK((r.v_hat - ls).norm() <= 1e-6);
  }
  SUBCASE("unscaled variant is logged") {
    p.scale_linear_by_y_norm = false;
    const FitReport r = adaptively_regularized_lasso(x, Vector::Ones(8), {}, p);
    CHECK(r.notes.back() == "linear term unscaled");
    const auto [a, b] = ar_lasso_coefficients(p, 5, 10.0);
    CHECK(b == doctest::Approx(2 * std::sqrt(2 * 0.5 * std::log(12 * 5 / 0.1))));
    CHECK(a == doctest::Approx(8 * 0.5 * std::log(12 * 5 / 0.1)));
  }
  SUBCASE("parameter errors") {
    p.lambda_high = -1;
    CHECK_THROWS_AS(adaptively_regularized_lasso(x, Vector::Ones(8), {}, p), ValidationError);
    p.lambda_high = 1;
    p.delta = 1.5;
    CHECK_THROWS_AS(adaptively_regularized_lasso(x, Vector::Ones(8), {}, p), ValidationError);
  }
}

TEST_CASE("composite lasso beats random perturbations") {
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = testutil::gaussian_matrix(12, 7, 40 + trial);
    const Vector y = testutil::gaussian_vector(12, 50 + trial);
    const double qa = 0.3, lb = 2.0;
    const IndexSet ex{1, 4};
    const FitReport r = composite_l1_lasso(x, y, ex, qa, lb);
    auto F = [&](const Vector& v) {
      double s = 0;
      for (int i = 0; i < 7; ++i) {
        if (i != 1 && i != 4) s += std::abs(v(i));
      }
      return (x * v - y).squaredNorm() + qa * s * s + lb * s;
    };
    CHECK(F(r.v_hat) == doctest::Approx(r.objective).epsilon(1e-12));
    for (int k = 0; k < 2000; ++k) {
      Vector u = testutil::gaussian_vector(7, 7000 + 31 * trial + k);
      u.normalize();
      CHECK(F(r.v_hat + 1e-4 * u) >= r.objective - 1e-8 * (1 + std::abs(r.objective)));
    }
  }
}

TEST_CASE("constrained_lasso") {
  SUBCASE("zero radius") {
    const Vector y = testutil::gaussian_vector(5, 1);
    const FitReport r = constrained_lasso(testutil::gaussian_matrix(5, 3, 2), y, 0.0);
    CHECK(r.v_hat.norm() == 0.0);
    CHECK(r.objective == doctest::Approx(y.squaredNorm()));
  }
  SUBCASE("inactive constraint gives least squares") {
    const Matrix x = testutil::gaussian_matrix(20, 4, 3);
    const Vector y = testutil::gaussian_vector(20, 4);
    const Vector ls = x.colPivHouseholderQr().solve(y);
    const FitReport r = constrained_lasso(x, y, ls.lpNorm<1>() * 2);
    CHECK((r.v_hat - ls).norm() < 1e-6);
  }
  SUBCASE("scalar projection") {
    const FitReport r = constrained_lasso(Matrix::Ones(1, 1), Vector::Constant(1, 2.0), 1.0);
    CHECK(r.v_hat(0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("KKT with an active constraint") {
    for (int trial = 0; trial < 5; ++trial) {
      const Matrix x = testutil::gaussian_matrix(15, 8, 60 + trial);
      const Vector y = testutil::gaussian_vector(15, 70 + trial) * 5;
      const FitReport r = constrained_lasso(x, y, 1.0);
      CHECK(r.v_hat.lpNorm<1>() <= 1.0 + 1e-9);
      const Vector g = -2 * x.transpose() * (x * r.v_hat - y);
      double theta = 0;
      for (int i = 0; i < 8; ++i) {
        if (std::abs(r.v_hat(i)) > 1e-8) theta = std::max(theta, std::abs(g(i)));
      }
      for (int i = 0; i < 8; ++i) {
        if (std::abs(r.v_hat(i)) > 1e-8) {
          CHECK(std::abs(g(i) - theta * (r.v_hat(i) > 0 ? 1 : -1)) <= 1e-6 * (1 + theta));
        } else {
          CHECK(std::abs(g(i)) <= theta + 1e-6 * (1 + theta));
        }
      }
    }
  }
  CHECK_THROWS_AS(constrained_lasso(Matrix::Ones(1, 1), Vector::Ones(1), -1.0), ValidationError);
}

TEST_CASE("project_l1_ball matches a bisection oracle") {
  for (int trial = 0; trial < 20; ++trial) {
    const Vector v = testutil::gaussian_vector(9, 80 + trial) * 3;
    const double radius = 0.5 + trial * 0.2;
    const Vector p = project_l1_ball(v, radius);
    if (v.lpNorm<1>() <= radius) {
      CHECK(p == v);
      continue;
    }
    double lo = 0, hi = v.cwiseAbs().maxCoeff();
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      double s = 0;
      for (int i = 0; i < 9; ++i) s += std::max(0.0, std::abs(v(i)) - mid);
      (s > radius ? lo : hi) = mid;
    }
    for (int i = 0; i < 9; ++i) {
      const double expect = (v(i) > 0 ? 1 : -1) * std::max(0.0, std::abs(v(i)) - lo);
      CHECK(std::abs(p(i) - expect) < 1e-9);
    }
  }
}

TEST_CASE("mirror_descent_lasso") {
  SUBCASE("tiny ball collapses to zero") {
    const FitReport r = mirror_descent_lasso(testutil::gaussian_matrix(10, 4, 1), testutil::gaussian_vector(10, 2), 1e-12, 100);
    CHECK(r.v_hat.norm() <= 1e-12);
  }
  SUBCASE("agrees with constrained_lasso") {
    for (int trial = 0; trial < 3; ++trial) {
      const Matrix x = testutil::gaussian_matrix(20, 5, 90 + trial);
      const Vector y = testutil::gaussian_vector(20, 95 + trial) * 2;
      const FitReport md = mirror_descent_lasso(x, y, 2.0, 100000);
      const FitReport cl = constrained_lasso(x, y, 2.0);
      CHECK(md.v_hat.lpNorm<1>() <= 2.0 + 1e-12);
      CHECK(std::abs(md.objective - cl.objective / 20) <= 1e-4);
    }
  }
  SUBCASE("averaged objective does not increase with T") {
    const Matrix x = testutil::gaussian_matrix(20, 5, 97);
    const Vector y = testutil::gaussian_vector(20, 98);
    double prev = std::numeric_limits<double>::infinity();
    for (int T : {1, 10, 100, 10000}) {
      const double obj = mirror_descent_lasso(x, y, 2.0, T).objective;
      CHECK(obj <= prev + 1e-6);
      prev = obj;
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(mirror_descent_lasso(Matrix::Ones(1, 1), Vector::Ones(1), 0.0, 10), ValidationError);
    CHECK_THROWS_AS(mirror_descent_lasso(Matrix::Ones(1, 1), Vector::Ones(1), 1.0, 0), ValidationError);
  }
}

TEST_CASE("weak_learner_select") {
  const Matrix id = Matrix::Identity(2, 2);
  WeakLearnerChoice c = weak_learner_select(Matrix::Identity(2, 1), id, Vector::Unit(2, 0));
  CHECK(c.atom == 0);
  CHECK(c.beta == doctest::Approx(1.0));
  CHECK(c.residual == doctest::Approx(0.0));

  Vector y(2);
  y << 0, 3;
  c = weak_learner_select(id, id, y);
  CHECK(c.atom == 1);
  CHECK(c.beta == doctest::Approx(3.0));

  Matrix atoms(2, 2);
  atoms << 1, 1, 0, 1;
  y << 2, 1;
  c = weak_learner_select(atoms, id, y);
  CHECK(c.atom == 1);
  CHECK(c.beta == doctest::Approx(1.5));
  CHECK(c.residual == doctest::Approx(0.5));

  CHECK_THROWS_AS(weak_learner_select(Matrix(2, 0), id, y), ValidationError);
}

TEST_CASE("finite_model_selection") {
  const Matrix x = testutil::gaussian_matrix(100, 3, 11);
  const Vector v = testutil::gaussian_vector(3, 12);
  const Vector y = x * v;
  CHECK(finite_model_selection({v}, x, y) == 0);
  CHECK(finite_model_selection({v, v + Vector::Unit(3, 0)}, x, y) == 0);
  CHECK(finite_model_selection({v + Vector::Unit(3, 0), v, v}, x, y) == 1);
  CHECK_THROWS_AS(finite_model_selection({}, x, y), ValidationError);
}

TEST_CASE("SolverConfig validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.obj_tol = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("attach_excess_risk") {
  FitReport r;
  r.v_hat = Vector::Ones(2);
  Vector d(2);
  d << 2, 3;
  attach_excess_risk(r, SymMatrix::diagonal(d), Vector::Zero(2));
  REQUIRE(r.excess_risk);
  CHECK(*r.excess_risk == doctest::Approx(5.0));
}
