#include "featadapt/peeling.hpp"

#include <cmath>
#include <limits>

#include "featadapt/errors.hpp"

namespace featadapt {

Vector heavy_coordinate_scores(const std::vector<Vector>& vectors, int n) {
  Vector scores = Vector::Zero(n);
  if (vectors.empty()) return scores;
  for (const auto& v : vectors) {
    if (v.size() != n) throw ValidationError("find_heavy_coordinates: dimension mismatch");
  }
  double max_norm = 0.0;
  for (const auto& v : vectors) max_norm = std::max(max_norm, v.norm());
  if (max_norm == 0.0) return scores;

  const GramSchmidtResult gs = gram_schmidt_general(vectors, euclidean_inner());
  for (std::size_t i = 0; i < gs.coeffs.size(); ++i) {
    if (!gs.nonzero[i]) continue;
    Vector basis = Vector::Zero(n);
    for (std::size_t l = 0; l < vectors.size(); ++l) basis += gs.coeffs[i](l) * vectors[l];
    scores += basis.cwiseAbs2();
  }
  return scores;
}

IndexSet find_heavy_coordinates(const std::vector<Vector>& vectors, double alpha) {
  if (!(alpha > 0)) throw ValidationError("find_heavy_coordinates: alpha must be positive");
  if (vectors.empty()) throw ValidationError("find_heavy_coordinates: no spanning vectors");
  const int n = static_cast<int>(vectors.front().size());
  const Vector scores = heavy_coordinate_scores(vectors, n);
  IndexSet out;
  const double a2 = alpha * alpha;
  for (int i = 0; i < n; ++i) {
    if (scores(i) >= a2) out.push_back(i);
  }
  return out;
}

double PeelResult::size_bound() const {
  const double b = std::pow(7.0 * t, 2.0 * t + 1.0) * d;
  return std::isfinite(b) ? b : std::numeric_limits<double>::max();
}

PeelResult iterative_peeling(const EigenDecomp& e, int d, int t) {
  const int n = e.dim();
  if (d < 0 || d > n) throw ValidationError("iterative_peeling: d out of range");
  if (t < 1) throw ValidationError("iterative_peeling: t must be at least 1");

  PeelResult r;
  r.d = d;
  r.t = t;
  r.P = projection_top(e, d).matrix();
  r.lambda_d1 = d < n ? e.values(d) : 0.0;
  r.vacuous = !(r.lambda_d1 > 0.0);

  const double diag_threshold = 1.0 - 1.0 / (9.0 * t * t);
  IndexSet k;
  for (int i = 0; i < n; ++i) {
    if (r.P(i, i) < diag_threshold) k.push_back(i);
  }
  r.chain.push_back(k);

  const double alpha = 1.0 / (6.0 * t);
  for (int round = 0; round < t; ++round) {
    if (!k.empty()) {
      std::vector<Vector> cols;
      cols.reserve(k.size());
      for (int i : k) cols.emplace_back(r.P.col(i));
      k = set_union(k, find_heavy_coordinates(cols, alpha));
    }
    r.chain.push_back(k);
  }
  r.S = k;
  return r;
}

PeelResult iterative_peeling(const SymMatrix& sigma, int d, int t) {
  if (d < 0 || d > sigma.dim()) throw ValidationError("iterative_peeling: d out of range");
  return iterative_peeling(eig(sigma), d, t);
}

int suggest_d(const EigenDecomp& e, double theta) {
  if (e.dim() == 0) return 0;
  const double cut = theta * e.values(e.dim() - 1);
  int d = 0;
  for (int i = 0; i < e.dim(); ++i) {
    if (e.values(i) <= cut) ++d;
  }
  return d;
}

}  // namespace featadapt
