#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace featadapt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// Sorted, duplicate-free list of 0-based coordinate indices.
using IndexSet = std::vector<int>;

// Dense symmetric matrix. Symmetry is checked on construction; PSD-ness is
// checked only when a caller asks for it.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix entries);

  static SymMatrix identity(int n);
  static SymMatrix diagonal(const Vector& d);

  int dim() const { return static_cast<int>(a_.rows()); }
  const Matrix& matrix() const { return a_; }
  double operator()(int i, int j) const { return a_(i, j); }

  // Throws ValidationError when the smallest eigenvalue is below
  // -psd * |lambda|_max.
  void require_psd() const;
  bool is_psd() const;

 private:
  Matrix a_;
};

// Spectral factorization with eigenvalues in ascending order; column i of
// `vectors` pairs with values(i).
struct EigenDecomp {
  Vector values;
  Matrix vectors;

  int dim() const { return static_cast<int>(values.size()); }
  // 1-based accessor matching the usual lambda_1 <= ... <= lambda_n notation.
  double lambda(int one_based) const { return values(one_based - 1); }
  Matrix reconstruct() const;
};

EigenDecomp eig(const SymMatrix& sigma);

double sigma_inner(const SymMatrix& sigma, const Vector& u, const Vector& v);
// sqrt(u' S u); values in [-1e-12, 0] are clamped, anything lower throws.
double sigma_norm(const SymMatrix& sigma, const Vector& u);
double sigma_norm_sq(const SymMatrix& sigma, const Vector& u);

// Orthogonal projection onto the span of the top n-d eigenvectors.
SymMatrix projection_top(const EigenDecomp& e, int d);

// Spectral square root with eigenvalues below sqrt_clamp * lambda_max set to 0.
Matrix psd_sqrt(const EigenDecomp& e);

// Minimum eigenvalue of a symmetric matrix (convenience for spectral checks).
double min_eigenvalue(const Matrix& a);

using InnerProduct = std::function<double(const Vector&, const Vector&)>;

InnerProduct euclidean_inner();
InnerProduct matrix_inner(const Matrix& g);

struct GramSchmidtResult {
  // coeffs[i] is in R^k; the image sum_l coeffs[i](l) * v_l is either unit
  // norm under the inner product or (when nonzero[i] is false) numerically 0.
  std::vector<Vector> coeffs;
  std::vector<bool> nonzero;

  int rank() const;
};

// Modified Gram-Schmidt with one re-orthogonalization pass, carried out in
// coefficient space through the Gram matrix of the inputs. Images whose norm
// falls below `rel_tol` * (largest input norm) are left unnormalized and are
// skipped when orthogonalizing later vectors.
GramSchmidtResult gram_schmidt_general(const std::vector<Vector>& vectors,
                                       const InnerProduct& inner,
                                       double rel_tol = -1.0);

// Same, starting from a precomputed k x k Gram matrix.
GramSchmidtResult gram_schmidt_gram(const Matrix& gram, double rel_tol = -1.0);

struct SampleSet {
  Matrix X;  // m x n
  Vector y;  // m
  std::uint64_t seed = 0;

  int m() const { return static_cast<int>(X.rows()); }
  int n() const { return static_cast<int>(X.cols()); }
  void validate() const;
  // Rows [begin, begin + count).
  SampleSet slice(int begin, int count) const;
};

// X_i ~ N(0, Sigma) via the spectral square root, y_i = <X_i, v*> + N(0, noise_var).
SampleSet sample_gaussian(const SymMatrix& sigma, int m, double noise_var,
                          const Vector& v_star, std::uint64_t seed);
SampleSet sample_gaussian(const Matrix& sigma_sqrt, int m, double noise_var,
                          const Vector& v_star, std::uint64_t seed);

// Deterministic 64-bit mixing used to derive per-task seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Set helpers on sorted index lists.
IndexSet set_union(const IndexSet& a, const IndexSet& b);
IndexSet set_complement(const IndexSet& a, int n);
bool is_subset(const IndexSet& a, const IndexSet& b);

}  // namespace featadapt
