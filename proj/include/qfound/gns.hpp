#pragma once

// Gelfand-Naimark-Segal construction over a finite-dimensional algebra. The
// Gram form G[a][b] = Psi(E_a* E_b) on the matrix units E_a is factored as
// G = U diag(lambda) U*; classes of elements are Phi(R) = diag(lambda)^(1/2) U_r* c(R)
// with c(R) the matrix-unit coefficients of R.

#include "qfound/algebra.hpp"
#include "qfound/quantum_state.hpp"

#include <span>
#include <utility>
#include <vector>

namespace qfound {

inline constexpr double kGnsRankTolerance = 1e-10;

/// Linear, positive, normalized functional on an algebra.
class StateFunctional {
 public:
  /// Psi(S) = <tau, S tau>.
  static StateFunctional vector_state(const AlgebraPtr& algebra, const QuantumState& psi);
  /// Psi(S) = trace(S) / n.
  static StateFunctional tracial(const AlgebraPtr& algebra);
  /// Psi(S) = trace(rho S). Throws NonPositiveFunctional unless rho is
  /// Hermitian, positive semidefinite and of unit trace within 1e-12.
  static StateFunctional from_density(const AlgebraPtr& algebra, const Matrix& rho);

  Complex operator()(const AlgebraElement& s) const;
  /// Psi of the matrix unit E_(row, col).
  Complex on_matrix_unit(std::size_t row, std::size_t col) const { return rho_(col, row); }
  const AlgebraPtr& algebra() const { return algebra_; }

 private:
  StateFunctional(AlgebraPtr algebra, Matrix rho) : algebra_(std::move(algebra)), rho_(std::move(rho)) {}

  AlgebraPtr algebra_;
  Matrix rho_;
};

class GnsSpace {
 public:
  std::size_t rank() const { return static_cast<std::size_t>(weights_.size()); }
  const AlgebraPtr& algebra() const { return algebra_; }
  /// Matrix units (row, col) in block order.
  const std::vector<std::pair<std::size_t, std::size_t>>& algebra_basis() const { return units_; }
  const Matrix& gram() const { return gram_; }
  /// Orthonormal basis of the Gram range (columns).
  const Matrix& quotient_basis() const { return range_; }
  double tolerance() const { return tolerance_; }

  Vector coefficients(const AlgebraElement& r) const;
  /// Phi(R) as an r-vector.
  Vector class_vector(const AlgebraElement& r) const;
  /// Phi(I).
  Vector cyclic_vector() const;

 private:
  friend GnsSpace build_gns(const StateFunctional&, const AlgebraPtr&, double);
  friend Matrix represent(const GnsSpace&, const AlgebraElement&);

  AlgebraPtr algebra_;
  std::vector<std::pair<std::size_t, std::size_t>> units_;
  Matrix gram_;
  Matrix range_;
  Eigen::VectorXd weights_;  // retained Gram eigenvalues
  double tolerance_ = kGnsRankTolerance;
};

/// Matrix units (row, col) of the algebra in block order.
std::vector<std::pair<std::size_t, std::size_t>> matrix_units(const AlgebraDescriptor& algebra);

/// G[a][b] = Psi(E_a* E_b) over the given matrix units.
Matrix gram_matrix(const StateFunctional& psi,
                   const std::vector<std::pair<std::size_t, std::size_t>>& units);

/// Throws NonPositiveFunctional if the Gram form is indefinite beyond
/// tolerance, DimensionMismatch if the functional lives on another algebra.
GnsSpace build_gns(const StateFunctional& psi, const AlgebraPtr& algebra,
                   double tolerance = kGnsRankTolerance);

/// Pi(S) with Pi(S) Phi(R) = Phi(SR).
Matrix represent(const GnsSpace& space, const AlgebraElement& s);

/// <Phi(I), Pi(S) Phi(I)>.
Complex vacuum_expectation(const GnsSpace& space, const AlgebraElement& s);

struct CompressionReport {
  double residual = 0.0;             // |p A p - Psi(A) p|
  double value = 0.0;                // Psi(A)
  double invariance_residual = 0.0;  // max |Psi(S) - Psi(p S p)| over probes
};

/// Throws NotHermitian.
CompressionReport compression_identity_check(const QuantumState& psi, const AlgebraElement& a,
                                             std::span<const AlgebraElement> probes = {});

/// |Phi(p) - Phi(I)| <= tolerance.
bool class_equality_check(const GnsSpace& space, const AlgebraElement& p, double tolerance);

struct IdealReport {
  std::vector<AlgebraElement> basis;
  std::size_t algebra_dimension = 0;
  std::size_t ideal_dimension = 0;
  std::size_t quotient_dimension = 0;
};

/// J = {R : Psi(R*R) = 0 for every Psi in the family}. Throws InvalidArgument
/// on an empty family.
IdealReport seminorm_ideal(const AlgebraPtr& algebra, std::span<const StateFunctional> family,
                           double tolerance = kGnsRankTolerance);

}  // namespace qfound
