#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "featadapt/config.hpp"
#include "featadapt/linalg.hpp"
#include "featadapt/solvers.hpp"

namespace featadapt {

// [[Sigma, Sigma s], [s^T Sigma, s^T Sigma s]], the Gram extension by <X, s>.
SymMatrix augment_covariance(const SymMatrix& sigma, const Vector& s);

struct BoarConfig {
  int t = 1;
  int d_l = 0;
  int d_h = 0;
  int L = 1;
  double delta = 0.1;
  bool scale_linear_by_y_norm = true;
  SolverConfig solver;
};

struct BoostRound {
  int round = 0;
  IndexSet S;                    // peeled set in the augmented (n+1)-dim problem
  double lambda_high = 0.0;      // lambda_{n - d_h} of the augmented covariance
  FitReport fit;                 // arlasso on the augmented samples, w in R^{n+1}
  Vector s_hat;                  // cumulative estimate after this round
  std::optional<double> residual;  // ||v* - s_hat||_Sigma^2 when v* is known
};

struct BoostState {
  FitReport report;              // v_hat = s^{(L)}
  std::vector<BoostRound> rounds;
  int block_size = 0;            // samples per round
};

// Residual boosting over L disjoint sample blocks. Each round fits the
// augmented problem with sparsity t+1, d_l+1 small eigenvalues and failure
// budget delta/L, then folds the fit back into the running estimate.
BoostState boar_fit(const SymMatrix& sigma, const SampleSet& samples, const BoarConfig& cfg,
                    const std::optional<Vector>& v_star = std::nullopt);

// lambda_{d+1}^{-1} sum_i min(lambda_i, lambda_{d+1}) u_i u_i^T.
SymMatrix clipped_covariance(const EigenDecomp& e, int d);

struct AugDictConfig {
  int t = 1;
  int d_l = 0;
  int d_h = 0;
  double delta = 0.1;
  std::uint64_t subset_cap = kDefaultSubsetCap;
  int threads = 1;
  SolverConfig solver;
};

struct AugDictResult {
  FitReport report;
  IndexSet S;                   // peeled set
  std::vector<IndexSet> candidates;
  int selected = -1;            // index into candidates
  std::vector<double> holdout_loss;
};

// Columns e_1..e_n followed by a Sigma_bar-orthonormal basis of span{e_i : i in T}.
Matrix augmented_dictionary(const SymMatrix& sigma_bar, const IndexSet& T);

// Brute force over t-subsets of the peeled set: fit the regularized program on
// the first half of the samples for every candidate dictionary and select on
// the second half. When |S| < t the single candidate T = S is used.
AugDictResult augmented_dictionary_lasso(const SymMatrix& sigma, const SampleSet& samples,
                                         const AugDictConfig& cfg);

// All k-subsets of `pool` in lexicographic order; throws BudgetError above cap.
std::vector<IndexSet> enumerate_subsets(const IndexSet& pool, int k, std::uint64_t cap);

// Binomial coefficient saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

}  // namespace featadapt
