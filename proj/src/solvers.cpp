#include "featadapt/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "featadapt/errors.hpp"

namespace featadapt {
namespace {

double soft(double x, double k) {
  if (x > k) return x - k;
  if (x < -k) return x + k;
  return 0.0;
}

double weighted_l1(const Vector& w, const Vector& x) { return w.dot(x.cwiseAbs()); }

// Thin SVD restricted to the numerically nonzero singular values.
struct ThinSvd {
  Matrix U;  // m x r
  Vector s;  // r
  Matrix V;  // n x r

  static ThinSvd of(const Matrix& a) {
    ThinSvd out;
    if (a.rows() == 0 || a.cols() == 0) {
      out.U = Matrix(a.rows(), 0);
      out.V = Matrix(a.cols(), 0);
      out.s = Vector(0);
      return out;
    }
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double cut = sv.size() ? 1e-10 * sv(0) : 0.0;
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    out.U = svd.matrixU().leftCols(r);
    out.s = sv.head(r);
    out.V = svd.matrixV().leftCols(r);
    return out;
  }

  // Minimum-norm least-squares solution of a x = b.
  Vector solve(const Vector& b) const { return V * (U.transpose() * b).cwiseQuotient(s); }
};

// Orthonormal basis of the column space (rank-revealing).
Matrix column_basis(const Matrix& a) { return ThinSvd::of(a).U; }

Matrix select_cols(const Matrix& a, const IndexSet& idx) {
  Matrix out(a.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = a.col(idx[j]);
  return out;
}

// Largest eigenvalue of A^T A.
double spectral_norm_sq(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() <= a.cols()) {
    return Eigen::SelfAdjointEigenSolver<Matrix>(a * a.transpose(), Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  }
  return Eigen::SelfAdjointEigenSolver<Matrix>(a.transpose() * a, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

// prox of tau * (a s^2 + b s) composed with s = ||u||_1: every entry is shrunk by
// the same amount theta, which solves theta = tau (2 a ||shrink(z, theta)||_1 + b).
// The relation is piecewise linear in theta, so the root is found exactly by
// walking the sorted magnitudes.
Vector prox_composite_l1(const Vector& z, double tau, double a, double b) {
  const Eigen::Index n = z.size();
  std::vector<double> mag(z.data(), z.data() + n);
  for (auto& x : mag) x = std::abs(x);
  std::sort(mag.begin(), mag.end(), std::greater<>());
  double theta = tau * b;
  double prefix = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    // Candidate with the top k entries active.
    const double cand = (tau * b + 2.0 * a * tau * prefix) / (1.0 + 2.0 * a * tau * static_cast<double>(k));
    if (cand >= mag[k]) {
      theta = cand;
      break;
    }
    prefix += mag[k];
    theta = (tau * b + 2.0 * a * tau * prefix) / (1.0 + 2.0 * a * tau * static_cast<double>(k + 1));
  }
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = soft(z(i), theta);
  return out;
}

// Accelerated proximal gradient with adaptive restart for
//   min ||A u - c||^2 + g(u)
// where `prox(z, tau)` is the proximal map of tau * g and `penalty(u)` evaluates g.
template <class Prox, class Penalty>
FitReport fista(const Matrix& A, const Vector& c, Prox prox, Penalty penalty, const SolverConfig& cfg) {
  const Eigen::Index n = A.cols();
  const double lip = 2.0 * spectral_norm_sq(A);
  FitReport rep;
  Vector u = Vector::Zero(n);
  if (lip == 0.0 || n == 0) {
    // Loss is constant; the penalty alone decides, and 0 minimizes it.
    rep.v_hat = u;
    rep.objective = c.squaredNorm() + penalty(u);
    rep.converged = true;
    return rep;
  }
  const double tau = 1.0 / lip;
  auto objective = [&](const Vector& x) { return (A * x - c).squaredNorm() + penalty(x); };
  auto grad = [&](const Vector& x) { return Vector(2.0 * A.transpose() * (A * x - c)); };
  const double grad_scale = 1.0 + grad(u).norm();

  Vector yk = u;
  double tk = 1.0;
  double f_prev = objective(u);
  int stall = 0;
  int it = 0;
  for (; it < cfg.max_iter; ++it) {
    Vector u_next = prox(yk - tau * grad(yk), tau);
    const double f_next = objective(u_next);
    if (f_next > f_prev) {
      // Restart momentum from the last accepted point.
      yk = u;
      tk = 1.0;
      u_next = prox(u - tau * grad(u), tau);
    }
    const double f_new = objective(u_next);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    yk = u_next + ((tk - 1.0) / t_next) * (u_next - u);
    tk = t_next;
    const double change = std::abs(f_prev - f_new);
    u = std::move(u_next);
    f_prev = f_new;

    if (change <= 0.1 * cfg.obj_tol * (1.0 + std::abs(f_new))) {
      ++stall;
    } else {
      stall = 0;
    }
    if (stall >= 5 || it % 25 == 0) {
      // Gradient-mapping optimality measure at the current iterate.
      const Vector step = prox(u - tau * grad(u), tau);
      const double gmap = lip * (u - step).norm();
      if (gmap <= 1e-9 * grad_scale && stall >= 1) {
        rep.converged = true;
        ++it;
        break;
      }
      if (stall >= 50) {
        rep.converged = gmap <= 1e-6 * grad_scale;
        ++it;
        break;
      }
    }
  }
  rep.v_hat = u;
  rep.objective = objective(u);
  rep.iterations = it;
  return rep;
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iter < 1 || !(obj_tol > 0) || !(feas_tol > 0) || !(admm_rho > 0) || !(md_step_scale > 0)) {
    throw ValidationError("SolverConfig: iterations and tolerances must be positive");
  }
}

void attach_excess_risk(FitReport& r, const SymMatrix& sigma, const Vector& v_star) {
  r.excess_risk = sigma_norm_sq(sigma, r.v_hat - v_star);
}

FitReport weighted_basis_pursuit(const Matrix& A, const Vector& b, const Vector& weights, const SolverConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = A.cols();
  if (b.size() != A.rows() || weights.size() != n) throw ValidationError("basis_pursuit: dimension mismatch");
  if ((weights.array() < 0).any() || !weights.allFinite()) {
    throw ValidationError("basis_pursuit: weights must be finite and nonnegative");
  }

  const ThinSvd svd = ThinSvd::of(A);
  const Vector x0 = svd.solve(b);
  const double feas_scale = 1.0 + b.norm();
  if ((A * x0 - b).norm() > cfg.feas_tol * feas_scale) {
    throw InfeasibleError("basis_pursuit: A v = b has no solution (residual " +
                          std::to_string((A * x0 - b).norm()) + ")");
  }
  auto project = [&](const Vector& v) -> Vector { return v - svd.V * (svd.V.transpose() * v) + x0; };

  IndexSet free_idx;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (weights(i) == 0.0) free_idx.push_back(static_cast<int>(i));
  }
  const Matrix free_basis = free_idx.empty() ? Matrix(A.rows(), 0) : column_basis(select_cols(A, free_idx));

  // Lower bound from a dual-feasible rescaling of lambda = (A^T)^+ g.
  auto dual_bound = [&](const Vector& g) {
    if (svd.s.size() == 0) return 0.0;
    Vector lambda = svd.U * (svd.V.transpose() * g).cwiseQuotient(svd.s);
    if (free_basis.cols() > 0) lambda -= free_basis * (free_basis.transpose() * lambda);
    const Vector at = A.transpose() * lambda;
    double scale = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (weights(i) == 0.0) continue;
      if (std::abs(at(i)) > 0) scale = std::min(scale, weights(i) / std::abs(at(i)));
    }
    if (!std::isfinite(scale)) scale = 1.0;
    return std::max(0.0, scale * b.dot(lambda));
  };

  // Lower bound from the support equations A_J^T lambda = w_J sign(x_J), which
  // are exact at a nondegenerate optimum.
  auto support_dual_bound = [&](const Vector& x) {
    const double xmax = x.cwiseAbs().maxCoeff();
    IndexSet supp;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (weights(i) == 0.0 || std::abs(x(i)) > 1e-9 * xmax) supp.push_back(static_cast<int>(i));
    }
    if (supp.empty()) return 0.0;
    const Matrix at = select_cols(A, supp).transpose();
    Vector rhs(static_cast<Eigen::Index>(supp.size()));
    for (std::size_t j = 0; j < supp.size(); ++j) {
      const int i = supp[j];
      rhs(static_cast<Eigen::Index>(j)) = weights(i) == 0.0 ? 0.0 : weights(i) * (x(i) > 0 ? 1.0 : -1.0);
    }
    Vector lambda = ThinSvd::of(at).solve(rhs);
    if (free_basis.cols() > 0) lambda -= free_basis * (free_basis.transpose() * lambda);
    const Vector g = A.transpose() * lambda;
    double scale = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (weights(i) == 0.0) continue;
      if (std::abs(g(i)) > 0) scale = std::min(scale, weights(i) / std::abs(g(i)));
    }
    if (!std::isfinite(scale)) scale = 1.0;
    return std::max(0.0, scale * b.dot(lambda));
  };

  auto polish = [&](const Vector& z) -> std::optional<Vector> {
    const double zmax = z.cwiseAbs().maxCoeff();
    IndexSet supp;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (weights(i) == 0.0 || std::abs(z(i)) > 1e-8 * zmax) supp.push_back(static_cast<int>(i));
    }
    if (supp.empty()) return std::nullopt;
    const ThinSvd sub = ThinSvd::of(select_cols(A, supp));
    const Vector xs = sub.solve(b);
    Vector x = Vector::Zero(n);
    for (std::size_t j = 0; j < supp.size(); ++j) x(supp[j]) = xs(static_cast<Eigen::Index>(j));
    if ((A * x - b).norm() > cfg.feas_tol * feas_scale) return std::nullopt;
    return x;
  };

  FitReport rep;
  rep.method = "basis_pursuit";
  if (n == 0) {
    rep.v_hat = Vector(0);
    rep.converged = true;
    return rep;
  }
  if (weights.isZero()) {
    rep.v_hat = x0;
    rep.converged = true;
    rep.notes.push_back("all weights zero: minimum-norm solution returned");
    return rep;
  }

  const double wmean = weights.sum() / static_cast<double>((weights.array() > 0).count());
  const double xscale = std::max(x0.cwiseAbs().maxCoeff(), 1e-12);
  double rho = cfg.admm_rho * wmean / xscale;
  const double relax = 1.6;

  Vector x = x0;
  Vector z = x0;
  Vector u = Vector::Zero(n);
  Vector best = x0;
  double best_obj = weighted_l1(weights, x0);
  double gap = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < cfg.max_iter; ++it) {
    x = project(z - u);
    const Vector xh = relax * x + (1.0 - relax) * z;
    const Vector z_old = z;
    for (Eigen::Index i = 0; i < n; ++i) z(i) = soft(xh(i) + u(i), weights(i) / rho);
    u += xh - z;

    if (it % 10 == 9) {
      const double r = (x - z).norm();
      const double s = rho * (z - z_old).norm();
      if (r > 10.0 * s) {
        rho *= 2.0;
        u /= 2.0;
      } else if (s > 10.0 * r) {
        rho /= 2.0;
        u *= 2.0;
      }
    }
    if (it % 50 == 49) {
      const double obj_x = weighted_l1(weights, x);
      if (obj_x < best_obj) {
        best_obj = obj_x;
        best = x;
      }
      if (cfg.polish) {
        if (auto px = polish(z)) {
          const double po = weighted_l1(weights, *px);
          if (po < best_obj) {
            best_obj = po;
            best = *px;
          }
        }
      }
      gap = best_obj - std::max(dual_bound(rho * u), support_dual_bound(best));
      if (gap <= cfg.obj_tol * (1.0 + best_obj)) {
        ++it;
        break;
      }
    }
  }
  const double obj_x = weighted_l1(weights, x);
  if (obj_x < best_obj) {
    best_obj = obj_x;
    best = x;
  }
  if (cfg.polish) {
    if (auto px = polish(z)) {
      const double po = weighted_l1(weights, *px);
      if (po < best_obj) {
        best_obj = po;
        best = *px;
      }
    }
  }
  gap = std::min(gap, best_obj - std::max(dual_bound(rho * u), support_dual_bound(best)));
  rep.v_hat = best;
  rep.objective = best_obj;
  rep.iterations = it;
  rep.converged = gap <= cfg.obj_tol * (1.0 + best_obj);
  if (!rep.converged) rep.notes.push_back("duality gap " + std::to_string(gap));
  return rep;
}

FitReport basis_pursuit(const Matrix& X, const Vector& y, const IndexSet& exempt, const SolverConfig& cfg) {
  Vector w = Vector::Ones(X.cols());
  for (int i : exempt) {
    if (i < 0 || i >= X.cols()) throw ValidationError("basis_pursuit: exempt index out of range");
    w(i) = 0.0;
  }
  FitReport r = weighted_basis_pursuit(X, y, w, cfg);
  r.method = exempt.empty() ? "bp" : "adapted-bp";
  return r;
}

std::pair<double, double> ar_lasso_coefficients(const ArLassoParams& p, int n, double y_norm) {
  if (p.lambda_high < 0) throw ValidationError("adaptively_regularized_lasso: lambda_high must be >= 0");
  if (!(p.delta > 0 && p.delta < 1)) throw ValidationError("adaptively_regularized_lasso: delta must lie in (0,1)");
  const double lg = std::log(p.log_numerator * n / p.delta);
  const double quad = 8.0 * p.lambda_high * lg;
  double lin = 2.0 * std::sqrt(2.0 * p.lambda_high * lg);
  if (p.scale_linear_by_y_norm) lin *= y_norm;
  return {quad, lin};
}

FitReport composite_l1_lasso(const Matrix& X, const Vector& y, const IndexSet& exempt, double quad_coef,
                             double lin_coef, const SolverConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(X.cols());
  if (y.size() != X.rows()) throw ValidationError("lasso: dimension mismatch");
  if (quad_coef < 0 || lin_coef < 0) throw ValidationError("lasso: penalty coefficients must be >= 0");
  for (int i : exempt) {
    if (i < 0 || i >= n) throw ValidationError("lasso: exempt index out of range");
  }
  const IndexSet pen = set_complement(exempt, n);
  const Matrix xs = select_cols(X, exempt);
  const ThinSvd s_svd = ThinSvd::of(xs);

  FitReport rep;
  rep.method = "arlasso";
  Vector v = Vector::Zero(n);
  Vector u;
  if (pen.empty()) {
    u = Vector(0);
    rep.converged = true;
  } else {
    const Matrix xc = select_cols(X, pen);
    const Matrix& q = s_svd.U;
    const Matrix a = xc - q * (q.transpose() * xc);
    const Vector c = y - q * (q.transpose() * y);
    auto prox = [&](const Vector& z, double tau) { return prox_composite_l1(z, tau, quad_coef, lin_coef); };
    auto penalty = [&](const Vector& x) {
      const double s = x.cwiseAbs().sum();
      return quad_coef * s * s + lin_coef * s;
    };
    FitReport inner = fista(a, c, prox, penalty, cfg);
    u = inner.v_hat;
    rep.iterations = inner.iterations;
    rep.converged = inner.converged;
    for (std::size_t j = 0; j < pen.size(); ++j) v(pen[j]) = u(static_cast<Eigen::Index>(j));
  }
  if (!exempt.empty()) {
    Vector rhs = y;
    for (std::size_t j = 0; j < pen.size(); ++j) rhs -= X.col(pen[j]) * u(static_cast<Eigen::Index>(j));
    const Vector vs = s_svd.solve(rhs);
    for (std::size_t j = 0; j < exempt.size(); ++j) v(exempt[j]) = vs(static_cast<Eigen::Index>(j));
  }
  const double l1 = u.size() ? u.cwiseAbs().sum() : 0.0;
  rep.v_hat = v;
  rep.objective = (X * v - y).squaredNorm() + quad_coef * l1 * l1 + lin_coef * l1;
  return rep;
}

FitReport adaptively_regularized_lasso(const Matrix& X, const Vector& y, const IndexSet& exempt,
                                       const ArLassoParams& p, const SolverConfig& cfg) {
  const auto [quad, lin] = ar_lasso_coefficients(p, static_cast<int>(X.cols()), y.norm());
  FitReport r = composite_l1_lasso(X, y, exempt, quad, lin, cfg);
  r.notes.push_back(p.scale_linear_by_y_norm ? "linear term scaled by ||y||_2" : "linear term unscaled");
  return r;
}

Vector project_l1_ball(const Vector& v, double radius) {
  if (radius < 0) throw ValidationError("project_l1_ball: negative radius");
  if (v.cwiseAbs().sum() <= radius) return v;
  if (radius == 0) return Vector::Zero(v.size());
  std::vector<double> mag(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) mag[i] = std::abs(v(i));
  std::sort(mag.begin(), mag.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    cum += mag[k];
    const double cand = (cum - radius) / static_cast<double>(k + 1);
    if (mag[k] > cand) theta = cand;
  }
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = soft(v(i), theta);
  return out;
}

FitReport constrained_lasso(const Matrix& X, const Vector& y, double radius, const SolverConfig& cfg) {
  cfg.validate();
  if (radius < 0) throw ValidationError("constrained_lasso: negative radius");
  if (y.size() != X.rows()) throw ValidationError("constrained_lasso: dimension mismatch");
  FitReport rep;
  if (radius == 0) {
    rep.v_hat = Vector::Zero(X.cols());
    rep.objective = y.squaredNorm();
    rep.converged = true;
  } else {
    auto prox = [&](const Vector& z, double) { return project_l1_ball(z, radius); };
    auto penalty = [](const Vector&) { return 0.0; };
    rep = fista(X, y, prox, penalty, cfg);
  }
  rep.method = "classo";
  return rep;
}

FitReport mirror_descent_lasso(const Matrix& X, const Vector& y, double B, int T, double noise_var,
                               const SolverConfig& cfg) {
  cfg.validate();
  if (!(B > 0)) throw ValidationError("mirror_descent_lasso: B must be positive");
  if (T < 1) throw ValidationError("mirror_descent_lasso: T must be at least 1");
  if (y.size() != X.rows()) throw ValidationError("mirror_descent_lasso: dimension mismatch");
  const Eigen::Index n = X.cols();
  const double m = static_cast<double>(std::max<Eigen::Index>(X.rows(), 1));
  const Eigen::Index dim = 2 * n;

  // Log-weights over the 2n signed vertices {+B e_i, -B e_i}.
  Vector logp = Vector::Zero(dim);
  Vector p = Vector::Constant(dim, 1.0 / static_cast<double>(dim));
  Vector w = Vector::Zero(n);
  Vector avg = Vector::Zero(n);
  const double base_step = cfg.md_step_scale * std::sqrt(2.0 * std::log(static_cast<double>(dim)) / T);
  // The loss is smooth w.r.t. the l1 norm on the simplex with constant
  // B^2 max_ij |(2/m) X^T X|_ij; a step of 1/L is admissible under that analysis.
  const double smooth_l = B * B * ((2.0 / m) * (X.transpose() * X)).cwiseAbs().maxCoeff();
  const double smooth_step = smooth_l > 0 ? cfg.md_step_scale / smooth_l : 0.0;
  double g_max = 0.0;
  for (int it = 0; it < T; ++it) {
    avg += w;
    const Vector grad = (2.0 / m) * (X.transpose() * (X * w - y));
    // Gradient w.r.t. the simplex weights is (B g, -B g); the step uses the
    // largest sup-norm observed so far.
    g_max = std::max(g_max, B * grad.cwiseAbs().maxCoeff());
    if (g_max == 0.0) continue;
    const double eta = std::max(base_step / g_max, smooth_step);
    logp.head(n) -= eta * B * grad;
    logp.tail(n) += eta * B * grad;
    const double mx = logp.maxCoeff();
    p = (logp.array() - mx).exp();
    p /= p.sum();
    logp = p.array().log();
    w = B * (p.head(n) - p.tail(n));
  }
  avg /= static_cast<double>(T);

  FitReport rep;
  rep.method = "md";
  rep.v_hat = avg;
  rep.objective = (X * avg - y).squaredNorm() / m;
  rep.iterations = T;
  rep.converged = true;
  if (noise_var > 0) rep.notes.push_back("noise variance " + std::to_string(noise_var));
  return rep;
}

WeakLearnerChoice weak_learner_select(const Matrix& atoms, const Matrix& X, const Vector& y) {
  if (atoms.cols() == 0) throw ValidationError("weak_learner_select: empty dictionary");
  if (atoms.rows() != X.cols() || X.rows() != y.size()) throw ValidationError("weak_learner_select: dimension mismatch");
  WeakLearnerChoice best;
  best.residual = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < atoms.cols(); ++j) {
    const Vector f = X * atoms.col(j);
    const double ff = f.squaredNorm();
    const double beta = ff > 0 ? f.dot(y) / ff : 0.0;
    const double res = (beta * f - y).squaredNorm();
    if (res < best.residual) {
      best = {static_cast<int>(j), beta, res};
    }
  }
  return best;
}

int finite_model_selection(const std::vector<Vector>& candidates, const Matrix& X, const Vector& y) {
  if (candidates.empty()) throw ValidationError("finite_model_selection: no candidates");
  int best = -1;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].size() != X.cols()) throw ValidationError("finite_model_selection: dimension mismatch");
    const double loss = (X * candidates[i] - y).squaredNorm();
    if (loss < best_loss) {
      best_loss = loss;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace featadapt
