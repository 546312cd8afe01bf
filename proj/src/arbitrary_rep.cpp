#include "featadapt/arbitrary_rep.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "featadapt/boosting.hpp"
#include "featadapt/errors.hpp"
#include "featadapt/parallel.hpp"

namespace featadapt {
namespace {

void check_t(int t) {
  if (t < 2 || t > 4) {
    throw ValidationError("arbitrary representation supports 2 <= t <= 4 (t = " + std::to_string(t) +
                          "); t = 1 is trivial and t >= 5 exceeds any practical budget");
  }
}

Matrix gather(const Matrix& points, const IndexSet& idx) {
  Matrix out(points.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = points.col(idx[j]);
  return out;
}

// Orthonormal basis of the column span.
Matrix span_basis(const Matrix& a) {
  if (a.cols() == 0) return Matrix(a.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  const double cut = s.size() ? 1e-10 * std::max(1.0, s(0)) : 0.0;
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return svd.matrixU().leftCols(r);
}

IndexSet iota(int n) {
  IndexSet out(n);
  for (int i = 0; i < n; ++i) out[i] = i;
  return out;
}

}  // namespace

std::vector<IndexSet> balanced_groups(int n) {
  if (n < 1) throw ValidationError("balanced_groups: n must be positive");
  const int g = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  std::vector<IndexSet> out(g);
  const int base = n / g;
  const int extra = n % g;
  int next = 0;
  for (int j = 0; j < g; ++j) {
    const int size = base + (j < extra ? 1 : 0);
    for (int k = 0; k < size; ++k) out[j].push_back(next++);
  }
  return out;
}

ColumnGeometry column_geometry(const Matrix& X) {
  const int n = static_cast<int>(X.cols());
  ColumnGeometry g;
  g.points = X;
  g.norms.resize(n);
  for (int i = 0; i < n; ++i) {
    g.norms(i) = X.col(i).norm();
    if (g.norms(i) == 0.0) {
      g.dropped.push_back(i);
    } else {
      g.points.col(i) /= g.norms(i);
    }
  }
  g.groups = balanced_groups(n);
  return g;
}

NearestResult nearest_subspace_index(const Matrix& points, const Matrix& span) {
  if (points.cols() == 0) throw ValidationError("nearest_subspace_index: empty point set");
  if (span.cols() > 0 && span.rows() != points.rows()) throw ValidationError("nearest_subspace_index: dimension mismatch");
  const Matrix q = span_basis(span);
  NearestResult best;
  best.distance = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    Vector r = points.col(i);
    if (q.cols() > 0) r -= q * (q.transpose() * r);
    const double dist = r.norm();
    if (dist < best.distance) {
      best.distance = dist;
      best.index = static_cast<int>(i);
    }
  }
  return best;
}

std::uint64_t represent_vectors_count(const std::vector<IndexSet>& groups, int n, int t) {
  check_t(t);
  std::uint64_t sq = 0;
  for (const auto& g : groups) sq += static_cast<std::uint64_t>(g.size()) * g.size();
  return groups.size() * binomial(n, t - 1) + static_cast<std::uint64_t>(t) * sq * binomial(n, t - 2);
}

RepresentedVectors represent_vectors(const Matrix& points, const std::vector<IndexSet>& groups, int t,
                                     std::uint64_t budget, int threads) {
  check_t(t);
  const int n = static_cast<int>(points.cols());
  const std::uint64_t total = represent_vectors_count(groups, n, t);
  if (total > budget) {
    throw BudgetError("represent_vectors: " + std::to_string(total) + " atoms exceed the budget " +
                      std::to_string(budget));
  }
  const auto proj_sets = enumerate_subsets(iota(n), t - 1, budget);
  const auto ortho_sets = enumerate_subsets(iota(n), t - 2, budget);

  std::vector<Matrix> per_group(groups.size());
  parallel_for(groups.size(), threads, [&](std::size_t j) {
    const IndexSet& grp = groups[j];
    const Matrix gp = gather(points, grp);
    const Eigen::Index count = static_cast<Eigen::Index>(proj_sets.size() + t * grp.size() * grp.size() * ortho_sets.size());
    Matrix out = Matrix::Zero(n, count);
    Eigen::Index col = 0;
    for (const auto& T : proj_sets) {
      const Matrix pt = gather(points, T);
      const NearestResult near = nearest_subspace_index(gp, pt);
      const int h = grp[near.index];
      bool in_t = false;
      for (int i : T) in_t = in_t || i == h;
      if (!in_t) {
        // Normal equations with a tiny ridge for near-singular spans.
        const Matrix gram = pt.transpose() * pt + tolerances().ridge * Matrix::Identity(pt.cols(), pt.cols());
        const Vector gamma = gram.ldlt().solve(pt.transpose() * points.col(h));
        for (std::size_t l = 0; l < T.size(); ++l) out(T[l], col) = gamma(static_cast<Eigen::Index>(l));
        out(h, col) = -1.0;
      }
      ++col;
    }
    for (const auto& T : ortho_sets) {
      for (int a : grp) {
        for (int b : grp) {
          IndexSet u = set_union(T, a < b ? IndexSet{a, b} : (a == b ? IndexSet{a} : IndexSet{b, a}));
          std::vector<Vector> vecs;
          for (int i : u) vecs.emplace_back(points.col(i));
          const GramSchmidtResult gs = gram_schmidt_general(vecs, euclidean_inner());
          Eigen::Index written = 0;
          for (std::size_t k = 0; k < gs.coeffs.size(); ++k) {
            if (!gs.nonzero[k]) continue;
            for (std::size_t l = 0; l < u.size(); ++l) out(u[l], col + written) = gs.coeffs[k](static_cast<Eigen::Index>(l));
            ++written;
          }
          col += t;  // remaining columns of a degenerate block stay zero
        }
      }
    }
    per_group[j] = std::move(out);
  });

  RepresentedVectors rv;
  rv.coeffs.resize(n, static_cast<Eigen::Index>(total));
  Eigen::Index col = 0;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    const Eigen::Index c = per_group[j].cols();
    rv.coeffs.middleCols(col, c) = per_group[j];
    for (Eigen::Index k = 0; k < c; ++k) {
      rv.group.push_back(static_cast<int>(j));
      rv.is_projection.push_back(k < static_cast<Eigen::Index>(proj_sets.size()));
    }
    col += c;
  }
  return rv;
}

Vector image_norms(const Matrix& points, const Matrix& coeffs) {
  return (points * coeffs).colwise().norm().transpose();
}

Dictionary compute_l1_representation(const Matrix& X, const L1RepConfig& cfg) {
  check_t(cfg.t);
  const int n = static_cast<int>(X.cols());
  const int m = static_cast<int>(X.rows());
  const double need = cfg.sample_factor * cfg.t * std::log(static_cast<double>(n));
  if (m < need) {
    throw ValidationError("compute_l1_representation: " + std::to_string(m) + " samples, need at least " +
                          std::to_string(static_cast<int>(std::ceil(need))));
  }
  const ColumnGeometry g = column_geometry(X);
  const RepresentedVectors rv = represent_vectors(g.points, g.groups, cfg.t, cfg.budget, cfg.threads);
  // sum_i dtilde_i p_i = sum_i (dtilde_i / ||q_i||) q_i.
  Matrix atoms = rv.coeffs;
  for (int i = 0; i < n; ++i) {
    if (g.norms(i) > 0) {
      atoms.row(i) /= g.norms(i);
    } else {
      atoms.row(i).setZero();
    }
  }
  const SymMatrix sigma_hat((X.transpose() * X / static_cast<double>(m)).eval());
  return Dictionary::from_atoms(std::move(atoms), sigma_hat, Provenance::ArbitraryRep);
}

RepCaseReport classify_rep_case(const ColumnGeometry& g, const Vector& x) {
  const int n = static_cast<int>(g.points.cols());
  if (x.size() != n) throw ValidationError("classify_rep_case: dimension mismatch");
  if (x.isZero()) throw ValidationError("classify_rep_case: x must be nonzero");
  RepCaseReport rep;
  x.cwiseAbs().maxCoeff(&rep.pivot);
  IndexSet rest;
  for (int i = 0; i < n; ++i) {
    if (i != rep.pivot && x(i) != 0) rest.push_back(i);
  }
  const IndexSet* grp = nullptr;
  for (const auto& gr : g.groups) {
    for (int i : gr) {
      if (i == rep.pivot) grp = &gr;
    }
  }
  const NearestResult near = nearest_subspace_index(gather(g.points, *grp), gather(g.points, rest));
  rep.nearest = (*grp)[near.index];
  rep.distance = near.distance;
  rep.branch = near.distance >= 0.5 ? RepCase::ProjectionFar : RepCase::ProjectionNear;
  return rep;
}

SlrResult slr_arbitrary(const SampleSet& samples, const SlrConfig& cfg) {
  check_t(cfg.t);
  samples.validate();
  if (!(cfg.B > 0)) throw ValidationError("slr_arbitrary: B must be positive");
  if (!(cfg.c_l1rep > 0)) throw ValidationError("slr_arbitrary: c_l1rep must be positive");
  const int n = samples.n();
  const int m = samples.m();
  const double logn = std::log(static_cast<double>(n));
  const int dict_m = static_cast<int>(std::ceil(cfg.sample_factor * cfg.t * logn));
  const int half = m / 2;
  if (dict_m > half || half < 1) {
    throw ValidationError("slr_arbitrary: " + std::to_string(m) + " samples, need at least " +
                          std::to_string(2 * dict_m));
  }

  SlrResult res;
  res.dictionary_samples = dict_m;
  L1RepConfig lc;
  lc.t = cfg.t;
  lc.sample_factor = cfg.sample_factor;
  lc.budget = cfg.budget;
  lc.threads = cfg.threads;
  res.dictionary = compute_l1_representation(samples.X.topRows(dict_m), lc);

  const Matrix& atoms = res.dictionary.atoms;
  const Matrix first = samples.X.topRows(half) * atoms;
  res.atom_scale = (first.colwise().squaredNorm().transpose() * (2.0 / m)).cwiseSqrt();
  Vector inv = Vector::Zero(atoms.cols());
  for (Eigen::Index k = 0; k < atoms.cols(); ++k) {
    if (res.atom_scale(k) > 0) inv(k) = 1.0 / res.atom_scale(k);
  }
  const Matrix features = samples.X.middleRows(half, m - half) * atoms * inv.asDiagonal();
  const Vector y2 = samples.y.segment(half, m - half);

  res.l1_budget = 2.0 * cfg.c_l1rep * std::pow(cfg.t, 1.5) * cfg.B * logn;
  FitReport md = mirror_descent_lasso(features, y2, res.l1_budget, half, cfg.noise_var, cfg.solver);
  res.beta = md.v_hat;
  res.report = md;
  res.report.method = "slr";
  res.report.seed = samples.seed;
  res.report.v_hat = atoms * inv.asDiagonal() * res.beta;
  res.report.notes.push_back(std::to_string(atoms.cols()) + " atoms from " + std::to_string(dict_m) + " samples");
  return res;
}

}  // namespace featadapt
