#pragma once

#include "qfound/algebra.hpp"
#include "qfound/quantum_state.hpp"
#include "qfound/rng.hpp"

namespace qfound {

/// Element with independent standard complex Gaussian entries in every block.
AlgebraElement random_element(const AlgebraPtr& algebra, Rng& rng);

/// (X + X*) / 2 for X = random_element.
AlgebraElement random_hermitian(const AlgebraPtr& algebra, Rng& rng);

/// Haar-distributed unit vector of the given dimension.
QuantumState random_state(std::size_t dimension, Rng& rng);

/// Haar-distributed unitary (QR of a Gaussian matrix with phase-fixed R).
Matrix random_unitary(std::size_t dimension, Rng& rng);

}  // namespace qfound
