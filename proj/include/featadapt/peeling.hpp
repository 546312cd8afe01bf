#pragma once

#include <vector>

#include "featadapt/linalg.hpp"

namespace featadapt {

// Coordinates i for which some x in span(vectors) has |x_i| >= alpha * ||x||_2.
// Computed from an orthonormal basis A of the span as {i : ||A_i||^2 >= alpha^2}.
IndexSet find_heavy_coordinates(const std::vector<Vector>& vectors, double alpha);

// Per-coordinate squared row norms of an orthonormal basis of span(vectors),
// i.e. sup_{x in V} x_i^2 / ||x||^2. Empty span gives all zeros.
Vector heavy_coordinate_scores(const std::vector<Vector>& vectors, int n);

struct PeelResult {
  IndexSet S;                   // == chain.back()
  std::vector<IndexSet> chain;  // K_t, K_{t-1}, ..., K_0 (t + 1 entries, nested)
  Matrix P;                     // projection onto the top n - d eigenvectors
  int d = 0;
  int t = 0;
  double lambda_d1 = 0.0;       // lambda_{d+1}; 0 when d == n
  bool vacuous = false;         // lambda_{d+1} == 0: the norm guarantee is empty

  // (7t)^(2t+1) * d, saturating at the largest finite double.
  double size_bound() const;
};

PeelResult iterative_peeling(const SymMatrix& sigma, int d, int t);
PeelResult iterative_peeling(const EigenDecomp& e, int d, int t);

// Number of eigenvalues at or below theta * lambda_max.
int suggest_d(const EigenDecomp& e, double theta);

}  // namespace featadapt
