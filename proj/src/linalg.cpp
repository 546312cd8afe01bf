#include "featadapt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "featadapt/config.hpp"
#include "featadapt/errors.hpp"

namespace featadapt {

SymMatrix::SymMatrix(Matrix entries) : a_(std::move(entries)) {
  if (a_.rows() != a_.cols()) {
    throw ValidationError("SymMatrix: matrix is not square");
  }
  const double tol = tolerances().symmetry;
  for (Eigen::Index i = 0; i < a_.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < a_.cols(); ++j) {
      const double scale = std::max(1.0, std::abs(a_(i, j)));
      if (!std::isfinite(a_(i, j)) || std::abs(a_(i, j) - a_(j, i)) > tol * scale) {
        std::ostringstream os;
        os << "SymMatrix: entries (" << i << "," << j << ") and (" << j << "," << i
           << ") differ: " << a_(i, j) << " vs " << a_(j, i);
        throw ValidationError(os.str());
      }
    }
  }
  // Store the exactly symmetric part so downstream solvers see a clean input.
  a_ = 0.5 * (a_ + a_.transpose()).eval();
}

SymMatrix SymMatrix::identity(int n) { return SymMatrix(Matrix::Identity(n, n)); }

SymMatrix SymMatrix::diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }

bool SymMatrix::is_psd() const {
  if (dim() == 0) return true;
  const EigenDecomp e = eig(*this);
  const double scale = std::max(std::abs(e.values(0)), std::abs(e.values(dim() - 1)));
  return e.values(0) >= -tolerances().psd * scale;
}

void SymMatrix::require_psd() const {
  if (!is_psd()) throw ValidationError("matrix is not positive semi-definite");
}

Matrix EigenDecomp::reconstruct() const {
  return vectors * values.asDiagonal() * vectors.transpose();
}

EigenDecomp eig(const SymMatrix& sigma) {
  if (sigma.dim() == 0) return {Vector(), Matrix()};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sigma.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eig: symmetric QR iteration did not converge");
  }
  // Eigen already sorts ascending.
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double sigma_inner(const SymMatrix& sigma, const Vector& u, const Vector& v) {
  if (u.size() != sigma.dim() || v.size() != sigma.dim()) {
    throw ValidationError("sigma_inner: dimension mismatch");
  }
  return u.dot(sigma.matrix() * v);
}

double sigma_norm_sq(const SymMatrix& sigma, const Vector& u) {
  const double q = sigma_inner(sigma, u, u);
  if (q < -tolerances().sigma_norm_clamp) {
    throw ValidationError("sigma_norm: negative quadratic form; matrix is not PSD");
  }
  return std::max(q, 0.0);
}

double sigma_norm(const SymMatrix& sigma, const Vector& u) {
  return std::sqrt(sigma_norm_sq(sigma, u));
}

SymMatrix projection_top(const EigenDecomp& e, int d) {
  const int n = e.dim();
  if (d < 0 || d > n) throw ValidationError("projection_top: d out of range");
  const auto top = e.vectors.rightCols(n - d);
  return SymMatrix(top * top.transpose());
}

Matrix psd_sqrt(const EigenDecomp& e) {
  const int n = e.dim();
  if (n == 0) return Matrix();
  const double lmax = std::max(std::abs(e.values(n - 1)), std::abs(e.values(0)));
  Vector root(n);
  for (int i = 0; i < n; ++i) {
    root(i) = e.values(i) <= tolerances().sqrt_clamp * lmax ? 0.0 : std::sqrt(e.values(i));
  }
  return e.vectors * root.asDiagonal() * e.vectors.transpose();
}

double min_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

InnerProduct euclidean_inner() {
  return [](const Vector& a, const Vector& b) { return a.dot(b); };
}

InnerProduct matrix_inner(const Matrix& g) {
  return [g](const Vector& a, const Vector& b) { return a.dot(g * b); };
}

int GramSchmidtResult::rank() const {
  return static_cast<int>(std::count(nonzero.begin(), nonzero.end(), true));
}

GramSchmidtResult gram_schmidt_gram(const Matrix& gram, double rel_tol) {
  const int k = static_cast<int>(gram.rows());
  if (k == 0) throw ValidationError("gram_schmidt: empty input");
  if (rel_tol < 0) rel_tol = tolerances().gram_schmidt;

  double max_norm = 0.0;
  for (int i = 0; i < k; ++i) {
    if (gram(i, i) < -tolerances().sigma_norm_clamp * std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff())) {
      throw ValidationError("gram_schmidt: inner product is not positive semi-definite");
    }
    max_norm = std::max(max_norm, std::sqrt(std::max(gram(i, i), 0.0)));
  }
  const double floor = rel_tol * max_norm;
  const double max_entry = gram.cwiseAbs().maxCoeff();

  GramSchmidtResult out;
  out.coeffs.reserve(k);
  out.nonzero.reserve(k);
  std::vector<Vector> gram_times;  // gram * coeffs[j], cached for kept images
  gram_times.reserve(k);
  for (int i = 0; i < k; ++i) {
    Vector a = Vector::Unit(k, i);
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < i; ++j) {
        if (!out.nonzero[j]) continue;
        a -= gram_times[j].dot(a) * out.coeffs[j];
      }
    }
    Vector ga = gram * a;
    const double sq = a.dot(ga);
    // Round-off in a^T G a is bounded by a multiple of ||a||_1^2 max|G_ij|.
    const double a1 = a.lpNorm<1>();
    if (sq < -tolerances().sigma_norm_clamp * std::max(1.0, a1 * a1 * max_entry)) {
      throw ValidationError("gram_schmidt: inner product is not positive semi-definite");
    }
    const double norm = std::sqrt(std::max(sq, 0.0));
    if (norm <= floor || norm == 0.0) {
      out.coeffs.push_back(a);
      out.nonzero.push_back(false);
      gram_times.push_back(ga);
    } else {
      out.coeffs.push_back(a / norm);
      out.nonzero.push_back(true);
      gram_times.push_back(ga / norm);
    }
  }
  return out;
}

GramSchmidtResult gram_schmidt_general(const std::vector<Vector>& vectors,
                                       const InnerProduct& inner, double rel_tol) {
  const int k = static_cast<int>(vectors.size());
  if (k == 0) throw ValidationError("gram_schmidt: empty input");
  Matrix gram(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      gram(i, j) = inner(vectors[i], vectors[j]);
      gram(j, i) = gram(i, j);
    }
  }
  return gram_schmidt_gram(gram, rel_tol);
}

void SampleSet::validate() const {
  if (X.rows() != y.size()) throw ValidationError("SampleSet: row count differs from response count");
  if (!X.allFinite() || !y.allFinite()) throw ValidationError("SampleSet: non-finite entries");
}

SampleSet SampleSet::slice(int begin, int count) const {
  if (begin < 0 || count < 0 || begin + count > m()) throw ValidationError("SampleSet::slice out of range");
  return {X.middleRows(begin, count), y.segment(begin, count), seed};
}

SampleSet sample_gaussian(const Matrix& sigma_sqrt, int m, double noise_var, const Vector& v_star,
                          std::uint64_t seed) {
  const int n = static_cast<int>(sigma_sqrt.rows());
  if (m < 0) throw ValidationError("sample_gaussian: negative sample count");
  if (v_star.size() != n) throw ValidationError("sample_gaussian: v* has wrong dimension");
  if (noise_var < 0) throw ValidationError("sample_gaussian: negative noise variance");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) z(i, j) = normal(rng);
  }
  SampleSet s;
  s.seed = seed;
  s.X = z * sigma_sqrt;
  s.y = s.X * v_star;
  if (noise_var > 0) {
    const double sd = std::sqrt(noise_var);
    for (int i = 0; i < m; ++i) s.y(i) += sd * normal(rng);
  }
  return s;
}

SampleSet sample_gaussian(const SymMatrix& sigma, int m, double noise_var, const Vector& v_star,
                          std::uint64_t seed) {
  const EigenDecomp e = eig(sigma);
  if (e.dim() > 0) {
    const double scale = std::max(std::abs(e.values(0)), std::abs(e.values(e.dim() - 1)));
    if (e.values(0) < -tolerances().psd * scale) {
      throw ValidationError("sample_gaussian: covariance is not PSD");
    }
  }
  return sample_gaussian(psd_sqrt(e), m, noise_var, v_star, seed);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_complement(const IndexSet& a, int n) {
  IndexSet out;
  std::size_t p = 0;
  for (int i = 0; i < n; ++i) {
    while (p < a.size() && a[p] < i) ++p;
    if (p < a.size() && a[p] == i) continue;
    out.push_back(i);
  }
  return out;
}

bool is_subset(const IndexSet& a, const IndexSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace featadapt
