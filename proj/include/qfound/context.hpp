#pragma once

// Maximal commutative measurement contexts. In the matrix model a maximal
// commutative subalgebra is fixed by an orthonormal joint eigenbasis whose
// vectors each live inside one block; the context contains exactly the
// elements that are diagonal in that basis.

#include "qfound/algebra.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <vector>

namespace qfound {

using ContextId = std::size_t;

inline constexpr double kContextTolerance = 1e-8;
inline constexpr double kMembershipTolerance = 1e-9;

struct Context {
  ContextId id = 0;
  AlgebraPtr algebra;
  Matrix basis;                         // columns e_0 .. e_{n-1}, canonical form
  std::vector<double> generator_values; // <e_k, G e_k> for the designated generator G
  Eigen::MatrixXd fingerprint;          // |<f_i, e_k>| against a fixed reference frame, columns sorted

  std::size_t dimension() const { return static_cast<std::size_t>(basis.cols()); }
  Vector vector(std::size_t k) const { return basis.col(static_cast<Eigen::Index>(k)); }
  /// Rank-one projector onto basis vector k.
  AlgebraElement basis_projector(std::size_t k) const;
  /// The element sum_k values[k] |e_k><e_k|.
  AlgebraElement diagonal_element(std::span<const double> values) const;
};

using ContextPtr = std::shared_ptr<const Context>;

/// Canonical form of a basis: first significant component of every vector is
/// real positive; vectors ordered by descending generator value, ties broken
/// lexicographically on real (then imaginary) parts. Idempotent bit for bit.
Matrix canonicalize_basis(const Matrix& basis, const Matrix& generator,
                          std::vector<double>* generator_values = nullptr);

Eigen::MatrixXd basis_fingerprint(const Matrix& basis);

/// Lazily materialized index set of contexts. Bases equal up to per-vector
/// phase and ordering (within the fingerprint tolerance) share one id.
/// Registration takes an exclusive lock; lookups take a shared one.
class ContextRegistry {
 public:
  explicit ContextRegistry(double tolerance = kContextTolerance) : tolerance_(tolerance) {}

  ContextRegistry(const ContextRegistry&) = delete;
  ContextRegistry& operator=(const ContextRegistry&) = delete;

  /// Registers an orthonormal basis (columns) with designated generator used
  /// for canonical ordering. Returns the existing context on a fingerprint match.
  ContextPtr register_basis(const AlgebraPtr& algebra, const Matrix& basis,
                            const Matrix& generator);

  ContextPtr get(ContextId id) const;
  ContextPtr find(const AlgebraPtr& algebra, const Matrix& basis) const;
  std::size_t size() const;
  double tolerance() const { return tolerance_; }

 private:
  ContextPtr find_locked(const AlgebraDescriptor& algebra, const Eigen::MatrixXd& fp) const;

  double tolerance_;
  mutable std::shared_mutex mutex_;
  std::map<ContextId, ContextPtr> contexts_;
};

/// Context of a Hermitian observable whose eigenvalues are distinct inside
/// every block. Throws DegenerateSpectrum otherwise.
ContextPtr context_from_observable(const AlgebraElement& a, ContextRegistry& registry);

/// Context of a commuting Hermitian family with one-dimensional joint
/// eigenspaces. The first member is the designated generator.
ContextPtr context_from_family(std::span<const AlgebraElement> family, ContextRegistry& registry);

/// True iff `a` is diagonal in the context basis within 1e-9.
bool contains(const Context& ctx, const AlgebraElement& a);

AlgebraElement interpolated_generator(const AlgebraElement& a1, const AlgebraElement& a2,
                                      double alpha);

/// Connected components of the overlap graph between two contexts'
/// bases: component[k] for basis vector k of `from`, and the same labels for
/// `to`. Each component projector lies in both contexts; together they
/// generate the intersection of the two commutative subalgebras.
struct OverlapComponents {
  std::vector<std::size_t> from_label;
  std::vector<std::size_t> to_label;
  std::size_t count = 0;
};

OverlapComponents overlap_components(const Context& from, const Context& to);

}  // namespace qfound
