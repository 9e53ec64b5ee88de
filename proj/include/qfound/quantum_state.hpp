#pragma once

#include "qfound/algebra.hpp"
#include "qfound/context.hpp"

namespace qfound {

/// Pure quantum state: unit vector tau with projector p_tau = |tau><tau|,
/// optionally tied to the context on which its class of elementary states is
/// stable.
class QuantumState {
 public:
  /// Normalizes `v`; throws InvalidArgument for a zero vector.
  explicit QuantumState(Vector v, ContextPtr home_context = nullptr);

  /// Basis vector k of `ctx`, with `ctx` as home context.
  static QuantumState from_context(const ContextPtr& ctx, std::size_t k);

  const Vector& vector() const { return vector_; }
  Matrix projector() const { return vector_ * vector_.adjoint(); }
  AlgebraElement projector(const AlgebraPtr& algebra) const {
    return AlgebraElement(algebra, projector());
  }
  const ContextPtr& home_context() const { return home_; }
  std::size_t dimension() const { return static_cast<std::size_t>(vector_.size()); }

 private:
  Vector vector_;
  ContextPtr home_;
};

}  // namespace qfound
