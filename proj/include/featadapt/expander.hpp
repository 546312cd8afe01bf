#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "featadapt/errors.hpp"
#include "featadapt/linalg.hpp"

namespace featadapt {

// Sigma = eps I + Proj_{ker M} for a binary (n/100) x n matrix M. The row space
// is kept as an orthonormal basis so Sigma is applied without forming it.
struct ExpanderInstance {
  Matrix M;                  // rows x n, entries 0/1
  int n = 0;
  int n_requested = 0;       // before rounding up to a multiple of 100
  int k = 0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  Matrix row_basis;          // n x rank, orthonormal basis of span{M_j}
  Matrix row_gram;           // M M^T

  int rows() const { return static_cast<int>(M.rows()); }
  int rank() const { return static_cast<int>(row_basis.cols()); }
  Vector apply_sigma(const Vector& v) const;
  double sigma_norm(const Vector& v) const;
  // Dense Sigma; refuses n above max_dim.
  SymMatrix sigma(int max_dim = 2000) const;
  // ||v - M^T z||_2 with z from ridge least squares against M^T.
  double dist_to_row_space(const Vector& v) const;
  // Indices of the nonzero entries of row j.
  IndexSet row_support(int j) const;
};

// Rebuilds the row-space basis from M (kernel cut: eigenvalue <= 1e-10 of M M^T).
void finalize_expander(ExpanderInstance& inst);

// M_{ji} i.i.d. Bernoulli(k/n).
ExpanderInstance gen_expander_sigma(int n, int k, double eps, std::uint64_t seed);

struct ExpanderCheckConfig {
  double alpha = 0.3;
  double ratio_lo = 0.4;   // window for sigma_min(M^T)/sqrt(k)
  double ratio_hi = 2.5;   // window for sigma_max(M^T)/sqrt(k)
  int max_roots = 1000;    // BFS roots; all of [n] when n <= max_roots
  int threads = 1;
};

struct ExpanderReport {
  bool a_pass = false;
  int a_violations = 0;
  int left_degree_min = 0, left_degree_max = 0;
  bool b_pass = false;
  int b_violations = 0;
  int right_degree_min = 0, right_degree_max = 0;
  bool ci_pass = false;
  bool cii_pass = false;
  int ci_max = 0;          // largest (c-i) count seen
  int cii_max = 0;         // largest (c-ii) count seen
  int roots_checked = 0;
  int max_radius = 0;      // even r bound used
  double sigma_min_ratio = 0.0;
  double sigma_max_ratio = 0.0;
  bool d_pass = false;
};

ExpanderReport check_expander_properties(const ExpanderInstance& inst, const ExpanderCheckConfig& cfg = {});

// First row j (ascending) where more than k/2 supported entries of v share a
// sign; within a row the positive majority is checked first.
struct SignedRow {
  int row = -1;
  int sign = 0;  // +1 or -1
};
std::optional<SignedRow> majority_sign_row(const Matrix& M, const Vector& v, int k);

enum class GreedyStatus { Zero, StandardBasisBranch };

struct GreedyResult {
  Vector beta;       // one coefficient per row of M
  Vector residual;   // v - M^T beta
  GreedyStatus status = GreedyStatus::Zero;
  int steps = 0;
  std::vector<double> l1_trace;  // ||residual||_1 before each step and at exit
};

// Raised when dist(v_cur, span M) < 1/3 but no majority row reduces the l1 norm.
class SignAgreementCounterexample : public NumericalError {
 public:
  SignAgreementCounterexample(const std::string& what, Vector residual, int step)
      : NumericalError(what), residual_(std::move(residual)), step_(step) {}
  const Vector& residual() const { return residual_; }
  int step() const { return step_; }

 private:
  Vector residual_;
  int step_;
};

struct GreedyConfig {
  int max_steps = 10000;
  double max_l1 = 1e300;     // R: rejects ||v||_1 above this
  bool allow_real = false;   // experimental: accept non-integer v
};

// Peels majority-sign rows until the residual is zero or leaves the 1/3
// neighbourhood of the row space. Every accepted step satisfies
// ||v - s M_j||_1 <= ||v||_1 - 1 for integer v.
GreedyResult greedy_integer_representation(const ExpanderInstance& inst, const Vector& v,
                                           const GreedyConfig& cfg = {});

// Writes M.spm1 and meta.txt into `dir` (created if missing).
void save_expander(const std::string& dir, const ExpanderInstance& inst);
ExpanderInstance load_expander(const std::string& dir);

}  // namespace featadapt
