#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "featadapt/config.hpp"
#include "featadapt/linalg.hpp"
#include "featadapt/solvers.hpp"

namespace featadapt {

enum class Provenance { StandardBasis, SmallEig, BruteForce, Packing, ArbitraryRep, Expander };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

// Atoms are the columns of an n x N matrix; sigma_norms caches ||D_i||_Sigma
// for the covariance the dictionary was built against.
struct Dictionary {
  Matrix atoms;
  Vector sigma_norms;
  Provenance provenance = Provenance::StandardBasis;

  int dim() const { return static_cast<int>(atoms.rows()); }
  int size() const { return static_cast<int>(atoms.cols()); }
  // Number of atoms whose Sigma-norm is (numerically) zero.
  int zero_norm_atoms() const;

  static Dictionary from_atoms(Matrix atoms, const SymMatrix& sigma, Provenance p);
};

Dictionary standard_basis_dictionary(const SymMatrix& sigma);

// Standard basis plus a Sigma-orthonormal basis of span{e_i : i in T} for each
// T in C(S, t), S from iterative peeling. When |S| < t the single block T = S
// is used.
Dictionary build_small_eig_l1rep(const SymMatrix& sigma, int d, int t, std::uint64_t cap = kDefaultSubsetCap);

// t * C(n, t) atoms: a Sigma-orthonormal basis for every t-subset.
Dictionary brute_force_dictionary(const SymMatrix& sigma, int t, std::uint64_t cap = kDefaultSubsetCap);

struct CostResult {
  double cost = 0.0;
  Vector coeffs;
  bool converged = false;
};

// min sum_i w_i |alpha_i| subject to sum_i alpha_i D_i = v with w = sigma_norms.
// Zero-weight atoms are free. Throws InfeasibleError when v is outside the span.
CostResult representation_cost(const Dictionary& d, const Vector& v, const SolverConfig& cfg = {});
CostResult representation_cost(const Matrix& atoms, const Vector& weights, const Vector& v,
                               const SolverConfig& cfg = {});

// max_i |<v, D_i>_Sigma| / (||v||_Sigma ||D_i||_Sigma) over atoms of nonzero
// norm; 0 for an empty dictionary. NaN when ||v||_Sigma = 0.
double max_correlation(const Dictionary& d, const SymMatrix& sigma, const Vector& v);

struct VerifyReport {
  double min_correlation = 1.0;
  Vector worst_v;
  int vectors_checked = 0;
  bool exhaustive_sweep = false;
  bool pass = false;
};

// Sampled falsifier for the (t, alpha)-dictionary property. Draws `trials`
// random t-sparse vectors (per-trial seed mix_seed(seed, i)) and, when n <= 12
// and t <= 3, also sweeps every +/-1 vector on supports of size <= t.
VerifyReport verify_dictionary(const Dictionary& d, const SymMatrix& sigma, int t, double alpha, int trials,
                               std::uint64_t seed, int threads = 1);

// Every vector with entries in {-1, +1} on a support of size 1..t.
std::vector<Vector> signed_support_pool(int n, int t);

// Scan the pool in order and keep v when |corr(v, u)| < alpha for every kept u.
Dictionary greedy_packing(const SymMatrix& sigma, int t, double alpha, const std::vector<Vector>& pool);

struct SandwichReport {
  int packing_size = 0;
  double min_pool_correlation = 1.0;  // min over pool of max correlation with the packing
  bool pairwise_incoherent = false;
  bool pass = false;
};

// Builds the maximal greedy packing from the pool and checks the constructive
// direction: the packing is a (t, alpha)-dictionary for every pool vector.
SandwichReport covering_packing_sandwich_check(const SymMatrix& sigma, int t, double alpha,
                                               const std::vector<Vector>& pool);

// SPM1 atoms at `path` plus a CSV sidecar `path + ".csv"` with the Sigma-norms
// and provenance.
void save_dictionary(const std::string& path, const Dictionary& d);
Dictionary load_dictionary(const std::string& path);

}  // namespace featadapt
