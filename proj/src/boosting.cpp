#include "featadapt/boosting.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "featadapt/errors.hpp"
#include "featadapt/parallel.hpp"
#include "featadapt/peeling.hpp"

namespace featadapt {

SymMatrix augment_covariance(const SymMatrix& sigma, const Vector& s) {
  const int n = sigma.dim();
  if (s.size() != n) throw ValidationError("augment_covariance: dimension mismatch");
  const Vector cs = sigma.matrix() * s;
  Matrix out(n + 1, n + 1);
  out.topLeftCorner(n, n) = sigma.matrix();
  out.col(n).head(n) = cs;
  out.row(n).head(n) = cs.transpose();
  out(n, n) = s.dot(cs);
  return SymMatrix(std::move(out));
}

BoostState boar_fit(const SymMatrix& sigma, const SampleSet& samples, const BoarConfig& cfg,
                    const std::optional<Vector>& v_star) {
  const int n = sigma.dim();
  if (cfg.t < 1 || cfg.L < 1) throw ValidationError("boar_fit: t and L must be at least 1");
  if (cfg.d_l < 0 || cfg.d_l + 1 > n + 1) throw ValidationError("boar_fit: d_l out of range");
  if (cfg.d_h < 0 || cfg.d_h >= n) throw ValidationError("boar_fit: d_h out of range");
  if (samples.n() != n) throw ValidationError("boar_fit: samples have the wrong dimension");
  samples.validate();
  if (samples.m() < cfg.L) throw ValidationError("boar_fit: fewer samples than rounds");
  if (v_star && v_star->size() != n) throw ValidationError("boar_fit: v* has the wrong dimension");

  BoostState state;
  state.block_size = samples.m() / cfg.L;
  state.report.method = "boar";
  state.report.seed = samples.seed;
  if (samples.m() % cfg.L != 0) {
    state.report.notes.push_back("samples truncated to " + std::to_string(state.block_size * cfg.L));
  }

  Vector s = Vector::Zero(n);
  bool all_converged = true;
  for (int j = 0; j < cfg.L; ++j) {
    const SymMatrix sig_j = augment_covariance(sigma, s);
    const EigenDecomp e = eig(sig_j);
    const PeelResult peel = iterative_peeling(e, cfg.d_l + 1, cfg.t + 1);

    const int begin = j * state.block_size;
    const Matrix xb = samples.X.middleRows(begin, state.block_size);
    const Vector xs = xb * s;
    Matrix xa(state.block_size, n + 1);
    xa.leftCols(n) = xb;
    xa.col(n) = xs;
    const Vector ya = samples.y.segment(begin, state.block_size) - xs;

    ArLassoParams p;
    // lambda_{(n+1) - (d_h+1)} of the augmented covariance.
    p.lambda_high = std::max(0.0, e.lambda(n - cfg.d_h));
    p.delta = cfg.delta / cfg.L;
    p.scale_linear_by_y_norm = cfg.scale_linear_by_y_norm;

    FitReport fit = adaptively_regularized_lasso(xa, ya, peel.S, p, cfg.solver);
    if (!fit.converged) {
      SolverConfig retry = cfg.solver;
      retry.max_iter *= 4;
      fit = adaptively_regularized_lasso(xa, ya, peel.S, p, retry);
      fit.notes.push_back("retried with 4x iterations");
    }
    if (!fit.converged) {
      all_converged = false;
      state.report.notes.push_back("round " + std::to_string(j) + " did not converge; stopping");
      BoostRound r{j, peel.S, p.lambda_high, fit, s, std::nullopt};
      state.rounds.push_back(std::move(r));
      break;
    }

    const Vector v = fit.v_hat.head(n) + fit.v_hat(n) * s;
    s += v;
    BoostRound r{j, peel.S, p.lambda_high, fit, s, std::nullopt};
    if (v_star) r.residual = sigma_norm_sq(sigma, *v_star - s);
    state.report.iterations += fit.iterations;
    state.rounds.push_back(std::move(r));
  }

  state.report.v_hat = s;
  state.report.converged = all_converged;
  state.report.objective = state.rounds.empty() ? 0.0 : state.rounds.back().fit.objective;
  if (v_star) attach_excess_risk(state.report, sigma, *v_star);
  return state;
}

SymMatrix clipped_covariance(const EigenDecomp& e, int d) {
  const int n = e.dim();
  if (d < 0 || d >= n) throw ValidationError("clipped_covariance: d out of range");
  const double cap = e.values(d);
  if (!(cap > 0)) throw ValidationError("clipped_covariance: lambda_{d+1} must be positive");
  Vector clipped(n);
  for (int i = 0; i < n; ++i) clipped(i) = std::max(0.0, std::min(e.values(i), cap)) / cap;
  return SymMatrix(e.vectors * clipped.asDiagonal() * e.vectors.transpose());
}

Matrix augmented_dictionary(const SymMatrix& sigma_bar, const IndexSet& T) {
  const int n = sigma_bar.dim();
  Matrix basis(n, 0);
  if (!T.empty()) {
    const int k = static_cast<int>(T.size());
    Matrix gram(k, k);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) gram(a, b) = sigma_bar(T[a], T[b]);
    }
    const GramSchmidtResult gs = gram_schmidt_gram(gram);
    basis.resize(n, gs.rank());
    int col = 0;
    for (int i = 0; i < k; ++i) {
      if (!gs.nonzero[i]) continue;
      Vector d = Vector::Zero(n);
      for (int l = 0; l < k; ++l) d(T[l]) = gs.coeffs[i](l);
      basis.col(col++) = d;
    }
  }
  Matrix out(n, n + basis.cols());
  out.leftCols(n) = Matrix::Identity(n, n);
  out.rightCols(basis.cols()) = basis;
  return out;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) / i stays exact because r * (n-k+i) is divisible by i.
    const std::uint64_t num = n - k + i;
    if (r > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
    r = r * num / i;
  }
  return r;
}

std::vector<IndexSet> enumerate_subsets(const IndexSet& pool, int k, std::uint64_t cap) {
  if (k < 0) throw ValidationError("enumerate_subsets: negative size");
  const std::uint64_t count = binomial(pool.size(), static_cast<std::uint64_t>(k));
  if (count > cap) {
    throw BudgetError("subset enumeration C(" + std::to_string(pool.size()) + "," + std::to_string(k) +
                      ") = " + std::to_string(count) + " exceeds the cap " + std::to_string(cap));
  }
  std::vector<IndexSet> out;
  out.reserve(count);
  if (static_cast<std::size_t>(k) > pool.size()) return out;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  const int p = static_cast<int>(pool.size());
  for (;;) {
    IndexSet s(k);
    for (int i = 0; i < k; ++i) s[i] = pool[idx[i]];
    out.push_back(std::move(s));
    int i = k - 1;
    while (i >= 0 && idx[i] == p - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

AugDictResult augmented_dictionary_lasso(const SymMatrix& sigma, const SampleSet& samples,
                                         const AugDictConfig& cfg) {
  const int n = sigma.dim();
  if (cfg.t < 1) throw ValidationError("augmented_dictionary_lasso: t must be at least 1");
  if (cfg.d_l < 0 || cfg.d_l >= n) throw ValidationError("augmented_dictionary_lasso: d_l out of range");
  if (cfg.d_h < 0 || cfg.d_h >= n) throw ValidationError("augmented_dictionary_lasso: d_h out of range");
  if (!(cfg.delta > 0 && cfg.delta < 1)) throw ValidationError("augmented_dictionary_lasso: delta must lie in (0,1)");
  if (samples.n() != n) throw ValidationError("augmented_dictionary_lasso: samples have the wrong dimension");
  samples.validate();
  const int half = samples.m() / 2;
  if (half < 1) throw ValidationError("augmented_dictionary_lasso: need at least 2 samples");

  const EigenDecomp e = eig(sigma);
  const PeelResult peel = iterative_peeling(e, cfg.d_l, cfg.t);
  const SymMatrix sigma_bar = clipped_covariance(e, cfg.d_l);

  AugDictResult res;
  res.S = peel.S;
  if (static_cast<int>(peel.S.size()) >= cfg.t) {
    res.candidates = enumerate_subsets(peel.S, cfg.t, cfg.subset_cap);
  } else {
    res.candidates = {peel.S};
  }

  const Matrix x1 = samples.X.topRows(half);
  const Vector y1 = samples.y.head(half);
  const Matrix x2 = samples.X.middleRows(half, half);
  const Vector y2 = samples.y.segment(half, half);

  const double lam = std::max(0.0, e.lambda(n - cfg.d_h));
  const double lg = std::log(8.0 * n / cfg.delta);
  const double quad = 8.0 * lam * lg;
  const double lin = 2.0 * std::sqrt(2.0 * lam * lg) * y1.norm();

  const std::size_t count = res.candidates.size();
  std::vector<FitReport> fits(count);
  std::vector<Vector> estimates(count);
  parallel_for(count, cfg.threads, [&](std::size_t i) {
    const Matrix d = augmented_dictionary(sigma_bar, res.candidates[i]);
    fits[i] = composite_l1_lasso(x1 * d, y1, {}, quad, lin, cfg.solver);
    estimates[i] = d * fits[i].v_hat;
  });

  res.holdout_loss.resize(count);
  for (std::size_t i = 0; i < count; ++i) res.holdout_loss[i] = (x2 * estimates[i] - y2).squaredNorm();
  res.selected = finite_model_selection(estimates, x2, y2);

  res.report = fits[res.selected];
  res.report.method = "augdict";
  res.report.v_hat = estimates[res.selected];
  res.report.seed = samples.seed;
  bool all_converged = true;
  for (const auto& f : fits) all_converged = all_converged && f.converged;
  res.report.converged = all_converged;
  res.report.notes.push_back(std::to_string(count) + " candidate dictionaries");
  return res;
}

}  // namespace featadapt
