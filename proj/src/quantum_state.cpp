#include "qfound/quantum_state.hpp"

#include "qfound/errors.hpp"

namespace qfound {

QuantumState::QuantumState(Vector v, ContextPtr home_context) : home_(std::move(home_context)) {
  const double n = v.norm();
  if (!(n > 0.0)) throw InvalidArgument("quantum state vector must be nonzero");
  vector_ = v / n;
  if (home_ && home_->dimension() != dimension()) {
    throw DimensionMismatch("quantum state and home context dimensions differ");
  }
}

QuantumState QuantumState::from_context(const ContextPtr& ctx, std::size_t k) {
  if (k >= ctx->dimension()) throw InvalidArgument("basis index out of range");
  return QuantumState(ctx->vector(k), ctx);
}

}  // namespace qfound
