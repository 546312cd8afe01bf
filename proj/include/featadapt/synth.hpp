#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "featadapt/linalg.hpp"

namespace featadapt {

struct PlantedInstance {
  SymMatrix sigma;
  Vector v_star;
  int t = 0;    // sparsity of v_star
  int d_l = 0;  // number of planted dependencies
  std::string description;
  std::uint64_t seed = 0;
};

// Independent N(0,1) covariates except for `triplets` disjoint blocks starting
// at coordinates 0, 3, 6, ..., each distributed as
//   X_a = Z_a,  X_b = Z_a + 0.4 Z_b,  X_c = Z_b + 0.4 Z_c.
// v* puts (6.25, -6.25, 2.5) on the first block and 1/sqrt(tail) on each of
// the last `tail` coordinates.
PlantedInstance gen_triplet_instance(int n, int triplets, int tail);

// Ten triplets and a ten-coordinate tail at n = 1000. `scale` shrinks n and
// both counts proportionally (scale 0.2 gives n = 200 with two triplets).
PlantedInstance gen_figure1_instance(double scale = 1.0);

// One triplet, v* = (6.25, -6.25, 2.5, 0, ...).
PlantedInstance gen_suppfig_instance(int n = 1000);

struct PlantedDependency {
  IndexSet support;
  Vector coefficients;             // one per support entry
  double residual_variance = 0.0;  // variance of the unit-normalized combination
};

// Sigma = base (I - Pi_U) + W diag(rho) W^T with U the unit combinations and
// W = U (U^T U)^{-1}, so u_k^T Sigma u_k = rho_k and the combinations are
// mutually Sigma-orthogonal. Linearly dependent combinations are rejected.
PlantedInstance gen_planted_dependencies(int n, const std::vector<PlantedDependency>& deps,
                                         double base_variance);

// The chained dependency eps^{-1}(X_1 - X_2) - X_3 - X_4 = 0 on R^n with
// residual standard deviation eps per unit coefficient norm.
PlantedInstance gen_chained_instance(int n, double eps);

// d random sparse dependencies (support sizes in [2, max_support]) with
// residual variances log-uniform in [1e-6, 1e-3], then a random diagonal
// rescaling D Sigma D with D_ii in [0.5, 2]. v* is a random t-sparse vector.
PlantedInstance gen_random_planted(int n, int d, int max_support, int t, std::uint64_t seed);

// Q diag(lambda) Q^T with Haar-like Q and eigenvalues log-spaced in [1/kappa, 1].
SymMatrix random_covariance(int n, double kappa, std::uint64_t seed);

// Random t-sparse vector: support uniform over C(n, t), standard normal entries.
Vector random_sparse_vector(int n, int t, std::mt19937_64& rng);
Vector random_sparse_vector(int n, int t, std::uint64_t seed);

}  // namespace featadapt
