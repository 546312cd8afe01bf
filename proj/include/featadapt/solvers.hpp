#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "featadapt/linalg.hpp"

namespace featadapt {

struct SolverConfig {
  int max_iter = 50000;
  double obj_tol = 1e-8;   // relative objective tolerance
  double feas_tol = 1e-8;  // equality residual, relative to 1 + ||b||
  // ADMM penalty (initial value; adapted by residual balancing).
  double admm_rho = 1.0;
  // Mirror-descent step multiplier applied to the default step.
  double md_step_scale = 1.0;
  // Re-solve the equality system on the detected support after ADMM stops.
  bool polish = true;

  void validate() const;
};

struct FitReport {
  std::string method;
  Vector v_hat;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::optional<double> excess_risk;  // ||v_hat - v*||_Sigma^2 when v* is known
  std::uint64_t seed = 0;
  std::vector<std::string> notes;
};

// Fills excess_risk from a known ground truth.
void attach_excess_risk(FitReport& r, const SymMatrix& sigma, const Vector& v_star);

// min sum_i w_i |v_i| subject to A v = b. Zero weights leave a coordinate free.
FitReport weighted_basis_pursuit(const Matrix& A, const Vector& b, const Vector& weights,
                                 const SolverConfig& cfg = {});

// min sum_{i not in exempt} |v_i| subject to X v = y.
FitReport basis_pursuit(const Matrix& X, const Vector& y, const IndexSet& exempt = {},
                        const SolverConfig& cfg = {});

struct ArLassoParams {
  double lambda_high = 0.0;  // lambda_{n - d_h} of the covariance
  double delta = 0.1;        // failure probability
  double log_numerator = 12.0;  // the c in log(c n / delta)
  // Multiply the linear term by ||y||_2 (the analyzed program); false gives the
  // unscaled variant.
  bool scale_linear_by_y_norm = true;
};

// Penalty coefficients (a, b) of a ||v_{S^c}||_1^2 + b ||v_{S^c}||_1 for a
// problem of dimension n.
std::pair<double, double> ar_lasso_coefficients(const ArLassoParams& p, int n, double y_norm);

// min ||Xv - y||^2 + a ||v_{S^c}||_1^2 + b ||v_{S^c}||_1 with (a, b) from
// ar_lasso_coefficients. Exempt coordinates are eliminated exactly by least
// squares; ties among minimizers are broken toward minimum norm on S.
FitReport adaptively_regularized_lasso(const Matrix& X, const Vector& y, const IndexSet& exempt,
                                       const ArLassoParams& p, const SolverConfig& cfg = {});

// Same program with explicit coefficients.
FitReport composite_l1_lasso(const Matrix& X, const Vector& y, const IndexSet& exempt, double quad_coef,
                             double lin_coef, const SolverConfig& cfg = {});

// min ||Xw - y||^2 subject to ||w||_1 <= radius.
FitReport constrained_lasso(const Matrix& X, const Vector& y, double radius, const SolverConfig& cfg = {});

// Euclidean projection onto the l1 ball of the given radius.
Vector project_l1_ball(const Vector& v, double radius);

// Exponentiated-gradient (+/-) mirror descent on (1/m)||Xw - y||^2 over the
// l1 ball of radius B, T iterations, averaged iterate returned.
FitReport mirror_descent_lasso(const Matrix& X, const Vector& y, double B, int T, double noise_var = 0.0,
                               const SolverConfig& cfg = {});

struct WeakLearnerChoice {
  int atom = -1;
  double beta = 0.0;
  double residual = 0.0;  // ||beta X D_atom - y||^2
};

// Best single atom with closed-form scale; lowest index wins ties.
WeakLearnerChoice weak_learner_select(const Matrix& atoms, const Matrix& X, const Vector& y);

// Candidate with the smallest holdout squared loss; lowest index wins ties.
int finite_model_selection(const std::vector<Vector>& candidates, const Matrix& X, const Vector& y);

}  // namespace featadapt
