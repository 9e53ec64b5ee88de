#include "qfound/random.hpp"

#include <Eigen/QR>

#include <cmath>

namespace qfound {

namespace {

Complex gaussian(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const double re = g(rng);
  const double im = g(rng);
  return {re, im};
}

}  // namespace

AlgebraElement random_element(const AlgebraPtr& algebra, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(algebra->dimension());
  Matrix m = Matrix::Zero(n, n);
  for (std::size_t b = 0; b < algebra->block_count(); ++b) {
    const auto off = static_cast<Eigen::Index>(algebra->block_offset(b));
    const auto size = static_cast<Eigen::Index>(algebra->block_sizes()[b]);
    for (Eigen::Index i = 0; i < size; ++i) {
      for (Eigen::Index j = 0; j < size; ++j) m(off + i, off + j) = gaussian(rng);
    }
  }
  return AlgebraElement(algebra, m);
}

AlgebraElement random_hermitian(const AlgebraPtr& algebra, Rng& rng) {
  const AlgebraElement x = random_element(algebra, rng);
  return AlgebraElement(algebra, (x.matrix() + x.matrix().adjoint()) / 2.0);
}

QuantumState random_state(std::size_t dimension, Rng& rng) {
  Vector v(static_cast<Eigen::Index>(dimension));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = gaussian(rng);
  return QuantumState(v);
}

Matrix random_unitary(std::size_t dimension, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(dimension);
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = gaussian(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

}  // namespace qfound
