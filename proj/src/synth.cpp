#include "featadapt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "featadapt/errors.hpp"

namespace featadapt {

PlantedInstance gen_triplet_instance(int n, int triplets, int tail) {
  if (triplets < 1 || tail < 0) throw ValidationError("triplet template: need at least one triplet");
  if (3 * triplets + tail > n || n < 4) {
    throw ValidationError("triplet template: n = " + std::to_string(n) + " is too small for " +
                          std::to_string(triplets) + " triplets and a tail of " + std::to_string(tail));
  }
  // X = Z C for the coupling matrix C; Sigma = C^T C.
  Matrix c = Matrix::Identity(n, n);
  for (int k = 0; k < triplets; ++k) {
    const int a = 3 * k;
    c(a, a + 1) = 1.0;   // X_b gets Z_a
    c(a + 1, a + 1) = 0.4;
    c(a + 1, a + 2) = 1.0;   // X_c gets Z_b
    c(a + 2, a + 2) = 0.4;
  }
  PlantedInstance inst;
  inst.sigma = SymMatrix(c.transpose() * c);
  inst.v_star = Vector::Zero(n);
  inst.v_star(0) = 6.25;
  inst.v_star(1) = -6.25;
  inst.v_star(2) = 2.5;
  for (int i = n - tail; i < n; ++i) inst.v_star(i) = 1.0 / std::sqrt(static_cast<double>(tail));
  inst.t = 3 + tail;
  inst.d_l = triplets;
  std::ostringstream os;
  os << "triplets n=" << n << " triplets=" << triplets << " tail=" << tail;
  inst.description = os.str();
  return inst;
}

PlantedInstance gen_figure1_instance(double scale) {
  if (!(scale > 0) || scale > 1) throw ValidationError("figure1 template: scale must lie in (0, 1]");
  const int n = static_cast<int>(std::lround(1000 * scale));
  const int k = std::max(1, static_cast<int>(std::lround(10 * scale)));
  PlantedInstance inst = gen_triplet_instance(n, k, k);
  inst.description = "figure1 " + inst.description;
  return inst;
}

PlantedInstance gen_suppfig_instance(int n) {
  if (n < 4) throw ValidationError("suppfig template: n must be at least 4");
  PlantedInstance inst = gen_triplet_instance(n, 1, 0);
  inst.description = "suppfig " + inst.description;
  return inst;
}

PlantedInstance gen_planted_dependencies(int n, const std::vector<PlantedDependency>& deps,
                                         double base_variance) {
  if (n < 1) throw ValidationError("planted: n must be positive");
  if (!(base_variance > 0)) throw ValidationError("planted: base variance must be positive");
  const int k = static_cast<int>(deps.size());
  Matrix u = Matrix::Zero(n, k);
  Vector rho(k);
  for (int j = 0; j < k; ++j) {
    const auto& d = deps[j];
    if (d.support.empty() || static_cast<Eigen::Index>(d.support.size()) != d.coefficients.size()) {
      throw ValidationError("planted: dependency " + std::to_string(j) + " has mismatched support and coefficients");
    }
    if (d.residual_variance < 0) throw ValidationError("planted: negative residual variance");
    for (std::size_t l = 0; l < d.support.size(); ++l) {
      const int i = d.support[l];
      if (i < 0 || i >= n) throw ValidationError("planted: support index out of range");
      u(i, j) = d.coefficients(static_cast<Eigen::Index>(l));
    }
    const double norm = u.col(j).norm();
    if (norm == 0) throw ValidationError("planted: dependency " + std::to_string(j) + " is the zero combination");
    u.col(j) /= norm;
    rho(j) = d.residual_variance;
  }
  Matrix sigma = base_variance * Matrix::Identity(n, n);
  if (k > 0) {
    const Matrix g = u.transpose() * u;
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < 1e-10) {
      throw ValidationError("planted: dependency combinations are linearly dependent; the constraints are inconsistent");
    }
    const Matrix w = u * g.inverse();
    const Matrix proj = u * w.transpose();
    sigma = base_variance * (Matrix::Identity(n, n) - proj) + w * rho.asDiagonal() * w.transpose();
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
  }
  PlantedInstance inst;
  inst.sigma = SymMatrix(sigma);
  inst.sigma.require_psd();
  inst.v_star = Vector::Zero(n);
  inst.d_l = k;
  inst.description = "planted n=" + std::to_string(n) + " deps=" + std::to_string(k);
  return inst;
}

PlantedInstance gen_chained_instance(int n, double eps) {
  if (n < 4) throw ValidationError("chained: n must be at least 4");
  if (!(eps > 0)) throw ValidationError("chained: eps must be positive");
  PlantedDependency d;
  d.support = {0, 1, 2, 3};
  d.coefficients = Vector(4);
  d.coefficients << 1.0 / eps, -1.0 / eps, -1.0, -1.0;
  d.residual_variance = eps * eps;
  PlantedInstance inst = gen_planted_dependencies(n, {d}, 1.0);
  inst.description = "chained n=" + std::to_string(n) + " eps=" + std::to_string(eps);
  return inst;
}

Vector random_sparse_vector(int n, int t, std::mt19937_64& rng) {
  if (t < 0 || t > n) throw ValidationError("random_sparse_vector: t out of range");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates: the first t entries form a uniform t-subset.
  for (int i = 0; i < t; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::normal_distribution<double> normal;
  Vector v = Vector::Zero(n);
  for (int i = 0; i < t; ++i) v(idx[i]) = normal(rng);
  return v;
}

Vector random_sparse_vector(int n, int t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_sparse_vector(n, t, rng);
}

PlantedInstance gen_random_planted(int n, int d, int max_support, int t, std::uint64_t seed) {
  if (d < 0 || max_support < 2 || max_support > n) throw ValidationError("random planted: bad parameters");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size_dist(2, max_support);
  std::uniform_real_distribution<double> log_var(std::log(1e-6), std::log(1e-3));
  std::normal_distribution<double> normal;
  std::vector<PlantedDependency> deps;
  for (int j = 0; j < d; ++j) {
    const int s = size_dist(rng);
    Vector coeffs = random_sparse_vector(n, s, rng);
    PlantedDependency dep;
    for (int i = 0; i < n; ++i) {
      if (coeffs(i) != 0) dep.support.push_back(i);
    }
    dep.coefficients = Vector(s);
    for (int l = 0; l < s; ++l) dep.coefficients(l) = coeffs(dep.support[l]);
    dep.residual_variance = std::exp(log_var(rng));
    deps.push_back(std::move(dep));
  }
  PlantedInstance base = gen_planted_dependencies(n, deps, 1.0);
  std::uniform_real_distribution<double> scale(std::log(0.5), std::log(2.0));
  Vector diag(n);
  for (int i = 0; i < n; ++i) diag(i) = std::exp(scale(rng));
  PlantedInstance inst;
  inst.sigma = SymMatrix(diag.asDiagonal() * base.sigma.matrix() * diag.asDiagonal());
  inst.v_star = random_sparse_vector(n, t, rng);
  inst.t = t;
  inst.d_l = d;
  inst.seed = seed;
  inst.description = "random planted n=" + std::to_string(n) + " deps=" + std::to_string(d);
  return inst;
}

SymMatrix random_covariance(int n, double kappa, std::uint64_t seed) {
  if (n < 1 || !(kappa >= 1)) throw ValidationError("random_covariance: need n >= 1 and kappa >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  // Sign-fix so the distribution does not depend on the QR convention.
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    if (r(i, i) < 0) q.col(i) *= -1.0;
  }
  Vector lam(n);
  for (int i = 0; i < n; ++i) {
    const double frac = n == 1 ? 1.0 : static_cast<double>(i) / (n - 1);
    lam(i) = std::pow(kappa, frac - 1.0);
  }
  Matrix s = q * lam.asDiagonal() * q.transpose();
  return SymMatrix(0.5 * (s + s.transpose()));
}

}  // namespace featadapt
