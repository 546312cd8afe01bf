#pragma once

#include <limits>
#include <random>

#include "featadapt/boosting.hpp"
#include "featadapt/linalg.hpp"

namespace testutil {

using featadapt::Matrix;
using featadapt::SymMatrix;
using featadapt::Vector;

inline Matrix gaussian_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Matrix a(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) a(i, j) = z(rng);
  }
  return a;
}

inline Vector gaussian_vector(int n, std::uint64_t seed) { return gaussian_matrix(n, 1, seed).col(0); }

// A A^T for a Gaussian A, so eigenvalues are generic and the matrix is PSD.
inline SymMatrix random_psd(int n, int rank, std::uint64_t seed) {
  const Matrix a = gaussian_matrix(n, rank, seed);
  Matrix s = a * a.transpose();
  s = 0.5 * (s + s.transpose()).eval();
  return SymMatrix(s);
}

inline double frob(const Matrix& a) { return a.norm(); }

// Exhaustive vertex enumeration of min w.(v+ + v-) s.t. [A, -A][v+; v-] = b,
// (v+, v-) >= 0, for full-row-rank A.
inline double lp_vertex_optimum(const Matrix& A, const Vector& b, const Vector& w) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  Matrix full(m, 2 * n);
  full << A, -A;
  Vector cost(2 * n);
  cost << w, w;
  featadapt::IndexSet pool(2 * n);
  for (int i = 0; i < 2 * n; ++i) pool[i] = i;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& basis : featadapt::enumerate_subsets(pool, m, 1u << 30)) {
    Matrix sub(m, m);
    for (int j = 0; j < m; ++j) sub.col(j) = full.col(basis[j]);
    Eigen::FullPivLU<Matrix> lu(sub);
    if (lu.rank() < m) continue;
    const Vector x = lu.solve(b);
    if (x.minCoeff() < -1e-12) continue;
    double c = 0;
    for (int j = 0; j < m; ++j) c += cost(basis[j]) * x(j);
    best = std::min(best, c);
  }
  return best;
}

}  // namespace testutil
