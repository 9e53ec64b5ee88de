#pragma once

// Finite-dimensional involutive algebras realized as block-diagonal complex
// matrix algebras. A single block of size n is the full quantum algebra M_n;
// n blocks of size one give the commutative (classical) algebra C^n.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace qfound {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kDefaultGroupingTolerance = 1e-9;

class AlgebraDescriptor {
 public:
  explicit AlgebraDescriptor(std::vector<std::size_t> block_sizes);

  static AlgebraDescriptor full(std::size_t n) { return AlgebraDescriptor({n}); }
  static AlgebraDescriptor classical(std::size_t n) {
    return AlgebraDescriptor(std::vector<std::size_t>(n, 1));
  }

  std::size_t dimension() const { return dimension_; }
  const std::vector<std::size_t>& block_sizes() const { return block_sizes_; }
  std::size_t block_offset(std::size_t block) const { return offsets_[block]; }
  std::size_t block_count() const { return block_sizes_.size(); }
  std::size_t block_of(std::size_t row) const;
  bool same_block(std::size_t i, std::size_t j) const { return block_of(i) == block_of(j); }
  /// Complex dimension of the algebra as a vector space (sum of squared block sizes).
  std::size_t linear_dimension() const;
  bool is_classical() const;

  friend bool operator==(const AlgebraDescriptor& a, const AlgebraDescriptor& b) {
    return a.block_sizes_ == b.block_sizes_;
  }

 private:
  std::vector<std::size_t> block_sizes_;
  std::vector<std::size_t> offsets_;
  std::size_t dimension_ = 0;
};

using AlgebraPtr = std::shared_ptr<const AlgebraDescriptor>;

AlgebraPtr make_algebra(std::vector<std::size_t> block_sizes);
AlgebraPtr make_full_algebra(std::size_t n);
AlgebraPtr make_classical_algebra(std::size_t n);

/// An element of a block-diagonal matrix algebra. Off-block entries are
/// exactly zero.
class AlgebraElement {
 public:
  /// Throws DimensionMismatch if `m` is not square of the algebra's dimension
  /// and InvalidArgument if it has non-negligible off-block entries.
  AlgebraElement(AlgebraPtr algebra, Matrix m);

  static AlgebraElement zero(const AlgebraPtr& algebra);
  static AlgebraElement identity(const AlgebraPtr& algebra);

  const Matrix& matrix() const { return matrix_; }
  const AlgebraPtr& algebra() const { return algebra_; }
  std::size_t dimension() const { return algebra_->dimension(); }

  bool is_hermitian(double tolerance) const;
  /// Largest entry magnitude.
  double max_abs() const;

  AlgebraElement& operator+=(const AlgebraElement& other);
  AlgebraElement& operator-=(const AlgebraElement& other);
  AlgebraElement& operator*=(Complex scalar);

  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
  friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
  friend AlgebraElement operator*(AlgebraElement a, Complex s) { return a *= s; }
  friend AlgebraElement operator*(Complex s, AlgebraElement a) { return a *= s; }
  friend AlgebraElement operator-(AlgebraElement a) { return a *= Complex(-1.0); }
  friend AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b);

 private:
  AlgebraPtr algebra_;
  Matrix matrix_;
};

void require_same_algebra(const AlgebraElement& a, const AlgebraElement& b, const char* where);

struct SpectralPair {
  double eigenvalue;
  AlgebraElement projector;
};

struct SpectralDecomposition {
  std::vector<SpectralPair> pairs;  // ascending eigenvalue
  double tolerance;

  AlgebraElement reconstruct() const;
  AlgebraElement projector_sum() const;
};

/// Eigen-decomposition of a Hermitian element computed block by block, so the
/// eigenvectors never mix blocks.
struct BlockEigensystem {
  std::vector<double> eigenvalues;   // per basis vector; ascending within each block
  Matrix eigenvectors;               // columns, block-diagonal
  std::vector<std::size_t> block;    // block index of each column
};

BlockEigensystem block_eigensystem(const AlgebraElement& hermitian);

AlgebraElement adjoint(const AlgebraElement& r);
AlgebraElement commutator(const AlgebraElement& a, const AlgebraElement& b);

/// Sorted distinct eigenvalues; eigenvalues closer than
/// tolerance * max|eigenvalue| are merged. Throws NotHermitian.
std::vector<double> spectrum(const AlgebraElement& a,
                             double tolerance = kDefaultGroupingTolerance);

SpectralDecomposition spectral_decomposition(const AlgebraElement& a,
                                             double tolerance = kDefaultGroupingTolerance);

/// C*-norm: square root of the spectral radius of R*R.
double norm(const AlgebraElement& r);

/// Largest singular value of an arbitrary matrix.
double operator_norm(const Matrix& m);

bool is_one_dim_projector(const AlgebraElement& p, double tolerance = 1e-10);

struct PositivityStructure {
  bool holds = false;
  double min_eigenvalue = 0.0;   // of R*R
  AlgebraElement gram;           // R*R
  AlgebraElement square_root;    // A = A*, A^2 = R*R
  double root_residual = 0.0;    // |A^2 - R*R|
  bool null_implies_zero = true; // |R*R| = 0  =>  R = 0
};

PositivityStructure check_positivity_structure(const AlgebraElement& r, double tolerance = 1e-10);

/// Stable 16-hex-digit identifier of an element, insensitive to perturbations
/// well below 1e-9.
std::string fingerprint(const AlgebraElement& a);

}  // namespace qfound
