#include "featadapt/dictionary.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "featadapt/boosting.hpp"
#include "featadapt/errors.hpp"
#include "featadapt/matrix_io.hpp"
#include "featadapt/parallel.hpp"
#include "featadapt/peeling.hpp"
#include "featadapt/synth.hpp"

namespace featadapt {
namespace {

// Norms at or below this fraction of the largest are treated as zero.
constexpr double kZeroNormRel = 1e-10;

double zero_norm_floor(const Vector& norms) {
  return norms.size() ? kZeroNormRel * norms.maxCoeff() : 0.0;
}

// Sigma-orthonormal basis of span{e_i : i in T}; zero images are dropped.
Matrix sigma_orthonormal_block(const SymMatrix& sigma, const IndexSet& T) {
  const int n = sigma.dim();
  const int k = static_cast<int>(T.size());
  if (k == 0) return Matrix(n, 0);
  Matrix gram(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) gram(a, b) = sigma(T[a], T[b]);
  }
  const GramSchmidtResult gs = gram_schmidt_gram(gram);
  Matrix out(n, gs.rank());
  int col = 0;
  for (int i = 0; i < k; ++i) {
    if (!gs.nonzero[i]) continue;
    Vector d = Vector::Zero(n);
    for (int l = 0; l < k; ++l) d(T[l]) = gs.coeffs[i](l);
    out.col(col++) = d;
  }
  return out;
}

Matrix stack_blocks(const SymMatrix& sigma, const std::vector<IndexSet>& subsets, bool with_identity) {
  const int n = sigma.dim();
  std::vector<Matrix> blocks;
  Eigen::Index total = with_identity ? n : 0;
  for (const auto& T : subsets) {
    blocks.push_back(sigma_orthonormal_block(sigma, T));
    total += blocks.back().cols();
  }
  Matrix atoms(n, total);
  Eigen::Index col = 0;
  if (with_identity) {
    atoms.leftCols(n) = Matrix::Identity(n, n);
    col = n;
  }
  for (const auto& b : blocks) {
    atoms.middleCols(col, b.cols()) = b;
    col += b.cols();
  }
  return atoms;
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::StandardBasis: return "standard-basis";
    case Provenance::SmallEig: return "small-eig";
    case Provenance::BruteForce: return "brute-force";
    case Provenance::Packing: return "packing";
    case Provenance::ArbitraryRep: return "arbitrary-rep";
    case Provenance::Expander: return "expander";
  }
  return "unknown";
}

Provenance provenance_from_string(const std::string& s) {
  for (Provenance p : {Provenance::StandardBasis, Provenance::SmallEig, Provenance::BruteForce, Provenance::Packing,
                       Provenance::ArbitraryRep, Provenance::Expander}) {
    if (to_string(p) == s) return p;
  }
  throw FormatError("unknown dictionary provenance '" + s + "'");
}

int Dictionary::zero_norm_atoms() const {
  const double floor = zero_norm_floor(sigma_norms);
  int count = 0;
  for (Eigen::Index i = 0; i < sigma_norms.size(); ++i) {
    if (sigma_norms(i) <= floor) ++count;
  }
  return count;
}

Dictionary Dictionary::from_atoms(Matrix atoms, const SymMatrix& sigma, Provenance p) {
  if (atoms.rows() != sigma.dim()) throw ValidationError("Dictionary: atom dimension differs from Sigma");
  Dictionary d;
  d.atoms = std::move(atoms);
  d.sigma_norms.resize(d.atoms.cols());
  const Matrix sa = sigma.matrix() * d.atoms;
  for (Eigen::Index i = 0; i < d.atoms.cols(); ++i) {
    const double q = d.atoms.col(i).dot(sa.col(i));
    if (q < -tolerances().sigma_norm_clamp * std::max(1.0, d.atoms.col(i).squaredNorm())) {
      throw ValidationError("Dictionary: negative quadratic form; Sigma is not PSD");
    }
    d.sigma_norms(i) = std::sqrt(std::max(q, 0.0));
  }
  d.provenance = p;
  return d;
}

Dictionary standard_basis_dictionary(const SymMatrix& sigma) {
  return Dictionary::from_atoms(Matrix::Identity(sigma.dim(), sigma.dim()), sigma, Provenance::StandardBasis);
}

Dictionary build_small_eig_l1rep(const SymMatrix& sigma, int d, int t, std::uint64_t cap) {
  const EigenDecomp e = eig(sigma);
  const int n = e.dim();
  if (d < 0 || d >= n) throw ValidationError("build_small_eig_l1rep: d out of range");
  if (!(e.values(d) > 0)) throw ValidationError("build_small_eig_l1rep: lambda_{d+1} must be positive");
  const PeelResult peel = iterative_peeling(e, d, t);
  std::vector<IndexSet> subsets;
  if (static_cast<int>(peel.S.size()) >= t) {
    subsets = enumerate_subsets(peel.S, t, cap);
  } else if (!peel.S.empty()) {
    subsets = {peel.S};
  }
  return Dictionary::from_atoms(stack_blocks(sigma, subsets, true), sigma, Provenance::SmallEig);
}

Dictionary brute_force_dictionary(const SymMatrix& sigma, int t, std::uint64_t cap) {
  const int n = sigma.dim();
  if (t < 1 || t > n) throw ValidationError("brute_force_dictionary: t out of range");
  IndexSet all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  const auto subsets = enumerate_subsets(all, t, cap);
  return Dictionary::from_atoms(stack_blocks(sigma, subsets, false), sigma, Provenance::BruteForce);
}

CostResult representation_cost(const Matrix& atoms, const Vector& weights, const Vector& v, const SolverConfig& cfg) {
  if (atoms.cols() == 0) throw ValidationError("representation_cost: empty dictionary");
  if (weights.size() != atoms.cols() || v.size() != atoms.rows()) {
    throw ValidationError("representation_cost: dimension mismatch");
  }
  if ((weights.array() < 0).any()) throw ValidationError("representation_cost: negative weight");
  if (weights.isZero()) throw ValidationError("representation_cost: all weights are zero");
  Vector w = weights;
  const double floor = zero_norm_floor(w);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) <= floor) w(i) = 0.0;
  }
  const FitReport r = weighted_basis_pursuit(atoms, v, w, cfg);
  return {r.objective, r.v_hat, r.converged};
}

CostResult representation_cost(const Dictionary& d, const Vector& v, const SolverConfig& cfg) {
  return representation_cost(d.atoms, d.sigma_norms, v, cfg);
}

double max_correlation(const Dictionary& d, const SymMatrix& sigma, const Vector& v) {
  if (v.size() != d.dim()) throw ValidationError("max_correlation: dimension mismatch");
  const double vn = sigma_norm(sigma, v);
  if (vn == 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (d.size() == 0) return 0.0;
  const Vector sv = sigma.matrix() * v;
  const Vector inner = d.atoms.transpose() * sv;
  const double floor = zero_norm_floor(d.sigma_norms);
  double best = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    if (d.sigma_norms(i) <= floor) continue;
    best = std::max(best, std::abs(inner(i)) / (vn * d.sigma_norms(i)));
  }
  return best;
}

std::vector<Vector> signed_support_pool(int n, int t) {
  if (t < 1 || t > n) throw ValidationError("signed_support_pool: t out of range");
  IndexSet all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  std::vector<Vector> out;
  for (int k = 1; k <= t; ++k) {
    for (const auto& T : enumerate_subsets(all, k, kDefaultSubsetCap)) {
      for (unsigned mask = 0; mask < (1u << k); ++mask) {
        Vector v = Vector::Zero(n);
        for (int l = 0; l < k; ++l) v(T[l]) = (mask >> l) & 1u ? -1.0 : 1.0;
        out.push_back(std::move(v));
      }
    }
  }
  return out;
}

VerifyReport verify_dictionary(const Dictionary& d, const SymMatrix& sigma, int t, double alpha, int trials,
                               std::uint64_t seed, int threads) {
  if (d.size() == 0) throw ValidationError("verify_dictionary: empty dictionary");
  if (trials < 1) throw ValidationError("verify_dictionary: trials must be at least 1");
  const int n = d.dim();
  if (t < 1 || t > n) throw ValidationError("verify_dictionary: t out of range");

  std::vector<Vector> vectors;
  VerifyReport rep;
  if (n <= 12 && t <= 3) {
    vectors = signed_support_pool(n, t);
    rep.exhaustive_sweep = true;
  }
  const std::size_t fixed = vectors.size();
  vectors.resize(fixed + static_cast<std::size_t>(trials));
  for (int i = 0; i < trials; ++i) vectors[fixed + i] = random_sparse_vector(n, t, mix_seed(seed, i));

  std::vector<double> corr(vectors.size());
  parallel_for(vectors.size(), threads, [&](std::size_t i) { corr[i] = max_correlation(d, sigma, vectors[i]); });

  rep.min_correlation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (std::isnan(corr[i])) continue;  // Sigma-null direction: correlation undefined
    ++rep.vectors_checked;
    if (corr[i] < rep.min_correlation) {
      rep.min_correlation = corr[i];
      rep.worst_v = vectors[i];
    }
  }
  if (rep.vectors_checked == 0) rep.min_correlation = 0.0;
  rep.pass = rep.vectors_checked > 0 && rep.min_correlation >= alpha;
  return rep;
}

Dictionary greedy_packing(const SymMatrix& sigma, int t, double alpha, const std::vector<Vector>& pool) {
  const int n = sigma.dim();
  if (pool.empty()) throw ValidationError("greedy_packing: empty pool");
  std::vector<Vector> kept;
  std::vector<Vector> kept_sigma;  // Sigma u / ||u||_Sigma
  for (const auto& v : pool) {
    if (v.size() != n) throw ValidationError("greedy_packing: dimension mismatch");
    if ((v.array() != 0).count() > t) throw ValidationError("greedy_packing: pool vector is not t-sparse");
    const double vn = sigma_norm(sigma, v);
    if (vn == 0.0) continue;
    bool incoherent = true;
    for (const auto& su : kept_sigma) {
      if (std::abs(v.dot(su)) >= alpha * vn) {
        incoherent = false;
        break;
      }
    }
    if (incoherent) {
      kept.push_back(v);
      kept_sigma.push_back(sigma.matrix() * v / vn);
    }
  }
  Matrix atoms(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) atoms.col(static_cast<Eigen::Index>(i)) = kept[i];
  return Dictionary::from_atoms(std::move(atoms), sigma, Provenance::Packing);
}

SandwichReport covering_packing_sandwich_check(const SymMatrix& sigma, int t, double alpha,
                                               const std::vector<Vector>& pool) {
  const Dictionary packing = greedy_packing(sigma, t, alpha, pool);
  SandwichReport rep;
  rep.packing_size = packing.size();
  rep.min_pool_correlation = std::numeric_limits<double>::infinity();
  for (const auto& v : pool) {
    const double c = max_correlation(packing, sigma, v);
    if (std::isnan(c)) continue;
    rep.min_pool_correlation = std::min(rep.min_pool_correlation, c);
  }
  rep.pairwise_incoherent = true;
  const Matrix sa = sigma.matrix() * packing.atoms;
  for (int i = 0; i < packing.size(); ++i) {
    for (int j = i + 1; j < packing.size(); ++j) {
      const double c = std::abs(packing.atoms.col(i).dot(sa.col(j))) / (packing.sigma_norms(i) * packing.sigma_norms(j));
      if (c >= alpha) rep.pairwise_incoherent = false;
    }
  }
  rep.pass = rep.pairwise_incoherent && rep.min_pool_correlation >= alpha * (1 - 1e-12);
  return rep;
}

void save_dictionary(const std::string& path, const Dictionary& d) {
  write_spm1(path, d.atoms);
  std::ofstream out(path + ".csv");
  if (!out) throw IoError("cannot open " + path + ".csv for writing");
  out.precision(17);
  out << "index,sigma_norm,provenance\n";
  for (int i = 0; i < d.size(); ++i) out << i << "," << d.sigma_norms(i) << "," << to_string(d.provenance) << "\n";
}

Dictionary load_dictionary(const std::string& path) {
  Dictionary d;
  d.atoms = read_spm1(path);
  std::ifstream in(path + ".csv");
  if (!in) throw IoError("missing dictionary sidecar " + path + ".csv");
  std::string line;
  std::getline(in, line);
  d.sigma_norms.resize(d.atoms.cols());
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string idx, norm, prov;
    if (!std::getline(ss, idx, ',') || !std::getline(ss, norm, ',') || !std::getline(ss, prov)) {
      throw FormatError("malformed dictionary sidecar line " + std::to_string(row + 2));
    }
    if (row >= d.atoms.cols()) throw FormatError("dictionary sidecar has more rows than atoms");
    d.sigma_norms(row) = std::stod(norm);
    d.provenance = provenance_from_string(prov);
    ++row;
  }
  if (row != d.atoms.cols()) throw FormatError("dictionary sidecar row count differs from atom count");
  return d;
}

}  // namespace featadapt
