#pragma once

#include <cstdint>
#include <vector>

#include "featadapt/config.hpp"
#include "featadapt/dictionary.hpp"
#include "featadapt/linalg.hpp"
#include "featadapt/solvers.hpp"

namespace featadapt {

// Normalized design-matrix columns and the group partition used by the
// representation builder.
struct ColumnGeometry {
  Matrix points;   // m x n, unit columns (zero columns stay zero)
  Vector norms;    // original column norms ||q_i||_2
  std::vector<IndexSet> groups;
  IndexSet dropped;  // coordinates whose column was identically zero
};

// ceil(sqrt(n)) contiguous groups whose sizes differ by at most one.
std::vector<IndexSet> balanced_groups(int n);

ColumnGeometry column_geometry(const Matrix& X);

struct NearestResult {
  int index = -1;  // column of `points`
  double distance = 0.0;
};

// Exact scan for argmin_i ||p_i - Proj_F p_i||_2 where F = span(columns of
// `span`); ties go to the lowest index. An empty span projects to 0.
NearestResult nearest_subspace_index(const Matrix& points, const Matrix& span);

// Coefficient vectors over the points, one per column of `coeffs`, in the
// order: for each group j, the projection residuals gamma - e_h for every
// T in C([n], t-1), then for every T in C([n], t-2) and ordered pair (a, b)
// in the group, t orthonormalization vectors of {p_i : i in T + {a, b}}.
// Degenerate blocks (repeated indices) are padded with zero vectors so the
// count is always ceil(sqrt n) C(n, t-1) + t sum_j |I_j|^2 C(n, t-2).
struct RepresentedVectors {
  Matrix coeffs;              // n x N
  std::vector<int> group;     // group index per atom
  std::vector<bool> is_projection;
};

std::uint64_t represent_vectors_count(const std::vector<IndexSet>& groups, int n, int t);

RepresentedVectors represent_vectors(const Matrix& points, const std::vector<IndexSet>& groups, int t,
                                     std::uint64_t budget = kDefaultSubsetCap, int threads = 1);

// Cost weights ||sum_i d_i p_i||_2 for coefficient vectors over the points.
Vector image_norms(const Matrix& points, const Matrix& coeffs);

struct L1RepConfig {
  int t = 2;
  double sample_factor = 100.0;  // require m >= sample_factor * t * log n
  std::uint64_t budget = kDefaultSubsetCap;
  int threads = 1;
};

// Normalizes the columns of X, builds the represented vectors and maps each
// coefficient vector back to covariate coordinates (d_i = dtilde_i / ||q_i||).
// The cached Sigma-norms use the empirical covariance X^T X / m.
Dictionary compute_l1_representation(const Matrix& X, const L1RepConfig& cfg);

enum class RepCase { ProjectionFar, ProjectionNear };

struct RepCaseReport {
  RepCase branch = RepCase::ProjectionFar;
  int pivot = -1;        // a: largest-magnitude coordinate of x
  int nearest = -1;      // h(T, j)
  double distance = 0.0; // ||p_h - q||_2
};

// Which branch of the cost argument applies to a sparse x: the far branch when
// the nearest point of the pivot's group is at distance >= 1/2 from the span of
// the other support points.
RepCaseReport classify_rep_case(const ColumnGeometry& g, const Vector& x);

struct SlrConfig {
  int t = 2;
  double B = 1.0;          // scale of ||w*||_Sigma
  double noise_var = 0.0;
  double c_l1rep = 4.0;
  double sample_factor = 100.0;
  std::uint64_t budget = kDefaultSubsetCap;
  int threads = 1;
  SolverConfig solver;
};

struct SlrResult {
  FitReport report;
  Dictionary dictionary;
  int dictionary_samples = 0;
  double l1_budget = 0.0;
  Vector beta;
  Vector atom_scale;  // sqrt((2/m) sum_{i <= m/2} <X_i, d>^2), 0 for null atoms
};

// Dictionary from the first sample_factor * t * log n samples, features
// <X_j, d / ||d||_hat> on the second half, mirror descent with l1 budget
// 2 c_l1rep t^{3/2} B log n for m/2 iterations.
SlrResult slr_arbitrary(const SampleSet& samples, const SlrConfig& cfg);

}  // namespace featadapt
