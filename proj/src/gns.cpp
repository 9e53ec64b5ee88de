#include "qfound/gns.hpp"

#include "qfound/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace qfound {

StateFunctional StateFunctional::vector_state(const AlgebraPtr& algebra, const QuantumState& psi) {
  if (psi.dimension() != algebra->dimension()) {
    throw DimensionMismatch("state and algebra dimensions differ");
  }
  return StateFunctional(algebra, psi.projector());
}

StateFunctional StateFunctional::tracial(const AlgebraPtr& algebra) {
  const auto n = static_cast<Eigen::Index>(algebra->dimension());
  return StateFunctional(algebra, Matrix::Identity(n, n) / static_cast<double>(n));
}

StateFunctional StateFunctional::from_density(const AlgebraPtr& algebra, const Matrix& rho) {
  const auto n = static_cast<Eigen::Index>(algebra->dimension());
  if (rho.rows() != n || rho.cols() != n) throw DimensionMismatch("density has the wrong dimension");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    throw NonPositiveFunctional("density is not Hermitian");
  }
  if (std::abs(rho.trace() - Complex(1.0)) > 1e-12) {
    throw NonPositiveFunctional("density trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12) {
    throw NonPositiveFunctional("density has a negative eigenvalue " +
                                std::to_string(es.eigenvalues().minCoeff()));
  }
  return StateFunctional(algebra, rho);
}

Complex StateFunctional::operator()(const AlgebraElement& s) const {
  if (!(*s.algebra() == *algebra_)) throw DimensionMismatch("functional evaluated on another algebra");
  return (rho_ * s.matrix()).trace();
}

std::vector<std::pair<std::size_t, std::size_t>> matrix_units(const AlgebraDescriptor& algebra) {
  std::vector<std::pair<std::size_t, std::size_t>> units;
  for (std::size_t b = 0; b < algebra.block_count(); ++b) {
    const std::size_t off = algebra.block_offset(b);
    const std::size_t m = algebra.block_sizes()[b];
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) units.emplace_back(off + i, off + j);
    }
  }
  return units;
}

Matrix gram_matrix(const StateFunctional& psi,
                   const std::vector<std::pair<std::size_t, std::size_t>>& units) {
  // E_(i,j)* E_(k,l) = delta_ik E_(j,l).
  const auto m = static_cast<Eigen::Index>(units.size());
  Matrix g = Matrix::Zero(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto [i, j] = units[a];
    for (Eigen::Index b = 0; b < m; ++b) {
      const auto [k, l] = units[b];
      if (i == k) g(a, b) = psi.on_matrix_unit(j, l);
    }
  }
  return g;
}

GnsSpace build_gns(const StateFunctional& psi, const AlgebraPtr& algebra, double tolerance) {
  if (!(*psi.algebra() == *algebra)) throw DimensionMismatch("functional lives on another algebra");
  GnsSpace space;
  space.algebra_ = algebra;
  space.units_ = matrix_units(*algebra);
  space.gram_ = gram_matrix(psi, space.units_);
  space.tolerance_ = tolerance;

  Eigen::SelfAdjointEigenSolver<Matrix> es(space.gram_);
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const double top = lambda.cwiseAbs().maxCoeff();
  if (lambda.minCoeff() < -tolerance * std::max(1.0, top)) {
    throw NonPositiveFunctional("Gram form has eigenvalue " + std::to_string(lambda.minCoeff()));
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = lambda.size() - 1; k >= 0; --k) {
    if (lambda(k) > tolerance * top) keep.push_back(k);
  }
  const auto r = static_cast<Eigen::Index>(keep.size());
  space.range_ = Matrix(space.gram_.rows(), r);
  space.weights_ = Eigen::VectorXd(r);
  for (Eigen::Index c = 0; c < r; ++c) {
    space.range_.col(c) = es.eigenvectors().col(keep[c]);
    space.weights_(c) = lambda(keep[c]);
  }
  return space;
}

Vector GnsSpace::coefficients(const AlgebraElement& r) const {
  if (!(*r.algebra() == *algebra_)) throw DimensionMismatch("element of another algebra");
  Vector c(static_cast<Eigen::Index>(units_.size()));
  for (std::size_t a = 0; a < units_.size(); ++a) {
    c(static_cast<Eigen::Index>(a)) =
        r.matrix()(static_cast<Eigen::Index>(units_[a].first), static_cast<Eigen::Index>(units_[a].second));
  }
  return c;
}

Vector GnsSpace::class_vector(const AlgebraElement& r) const {
  return weights_.cwiseSqrt().cast<Complex>().asDiagonal() * (range_.adjoint() * coefficients(r));
}

Vector GnsSpace::cyclic_vector() const { return class_vector(AlgebraElement::identity(algebra_)); }

Matrix represent(const GnsSpace& space, const AlgebraElement& s) {
  if (!(*s.algebra() == *space.algebra_)) throw DimensionMismatch("element of another algebra");
  // Left multiplication on coefficients: (SR)(i,j) = sum_k S(i,k) R(k,j).
  const auto m = static_cast<Eigen::Index>(space.units_.size());
  Matrix left = Matrix::Zero(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto [i, j] = space.units_[a];
    for (Eigen::Index b = 0; b < m; ++b) {
      const auto [k, l] = space.units_[b];
      if (j == l) left(a, b) = s.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
  }
  const Eigen::VectorXd root = space.weights_.cwiseSqrt();
  const Eigen::VectorXd inv_root = root.cwiseInverse();
  return root.cast<Complex>().asDiagonal() * space.range_.adjoint() * left * space.range_ *
         inv_root.cast<Complex>().asDiagonal();
}

Complex vacuum_expectation(const GnsSpace& space, const AlgebraElement& s) {
  const Vector omega = space.cyclic_vector();
  return omega.dot(represent(space, s) * omega);
}

CompressionReport compression_identity_check(const QuantumState& psi, const AlgebraElement& a,
                                             std::span<const AlgebraElement> probes) {
  if (!a.is_hermitian(1e-10)) throw NotHermitian("compression check needs a Hermitian element");
  if (psi.dimension() != a.dimension()) throw DimensionMismatch("state and element dimensions differ");
  const Matrix p = psi.projector();
  const auto f = StateFunctional::vector_state(a.algebra(), psi);
  CompressionReport rep;
  rep.value = f(a).real();
  rep.residual = operator_norm(p * a.matrix() * p - rep.value * p);
  for (const auto& s : probes) {
    const AlgebraElement compressed(s.algebra(), p * s.matrix() * p);
    rep.invariance_residual = std::max(rep.invariance_residual, std::abs(f(s) - f(compressed)));
  }
  return rep;
}

bool class_equality_check(const GnsSpace& space, const AlgebraElement& p, double tolerance) {
  return (space.class_vector(p) - space.cyclic_vector()).norm() <= tolerance;
}

IdealReport seminorm_ideal(const AlgebraPtr& algebra, std::span<const StateFunctional> family,
                           double tolerance) {
  if (family.empty()) throw InvalidArgument("seminorm ideal needs a nonempty functional family");
  const auto units = matrix_units(*algebra);
  const auto m = static_cast<Eigen::Index>(units.size());
  Matrix total = Matrix::Zero(m, m);
  for (const auto& f : family) {
    if (!(*f.algebra() == *algebra)) throw DimensionMismatch("functional lives on another algebra");
    total += gram_matrix(f, units);
  }
  // Each Gram is positive semidefinite, so the null space of the sum is the
  // common null space.
  Eigen::SelfAdjointEigenSolver<Matrix> es(total);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  IdealReport rep;
  rep.algebra_dimension = units.size();
  const auto n = static_cast<Eigen::Index>(algebra->dimension());
  for (Eigen::Index k = 0; k < m; ++k) {
    if (es.eigenvalues()(k) > tolerance * top) continue;
    Matrix r = Matrix::Zero(n, n);
    for (Eigen::Index a = 0; a < m; ++a) {
      r(static_cast<Eigen::Index>(units[a].first), static_cast<Eigen::Index>(units[a].second)) =
          es.eigenvectors()(a, k);
    }
    rep.basis.emplace_back(algebra, r);
  }
  rep.ideal_dimension = rep.basis.size();
  rep.quotient_dimension = rep.algebra_dimension - rep.ideal_dimension;
  return rep;
}

}  // namespace qfound
