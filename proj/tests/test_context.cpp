#include "oracles.hpp"
#include "qfound/context.hpp"
#include "qfound/errors.hpp"
#include "qfound/measurement.hpp"
#include "qfound/random.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <thread>

using namespace qfound;

namespace {

AlgebraElement full(const Matrix& m) { return AlgebraElement(make_full_algebra(m.rows()), m); }

bool same_ray(const Vector& a, const Vector& b) { return std::abs(std::abs(a.dot(b)) - 1.0) < 1e-12; }

}  // namespace

TEST_CASE("context of Pauli-z is the standard basis") {
  ContextRegistry reg;
  const auto ctx = context_from_observable(full(oracle::pauli_z()), reg);
  CHECK(ctx->dimension() == 2);
  // Descending generator order: +1 first.
  CHECK((ctx->vector(0) - Vector::Unit(2, 0)).norm() < 1e-12);
  CHECK((ctx->vector(1) - Vector::Unit(2, 1)).norm() < 1e-12);
  CHECK(ctx->generator_values[0] == doctest::Approx(1.0));
}

TEST_CASE("context of Pauli-x has the diagonal basis") {
  ContextRegistry reg;
  const auto ctx = context_from_observable(full(oracle::pauli_x()), reg);
  Vector plus(2), minus(2);
  plus << 1.0, 1.0;
  minus << 1.0, -1.0;
  plus /= std::sqrt(2.0);
  minus /= std::sqrt(2.0);
  CHECK((ctx->vector(0) - plus).norm() < 1e-12);
  CHECK((ctx->vector(1) - minus).norm() < 1e-12);
}

TEST_CASE("degenerate observables do not define a context") {
  ContextRegistry reg;
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 1.0, 1.0, 2.0;
  CHECK_THROWS_AS(context_from_observable(full(d), reg), DegenerateSpectrum);
  CHECK_THROWS_AS(context_from_observable(full(oracle::pauli_x() * Complex(0.0, 1.0)), reg), NotHermitian);
}

TEST_CASE("context from families") {
  ContextRegistry reg;
  const auto z = full(oracle::pauli_z());
  const auto id = AlgebraElement::identity(z.algebra());
  const AlgebraElement fam[] = {z, id};
  CHECK(context_from_family(fam, reg)->id == context_from_observable(z, reg)->id);

  const AlgebraElement noncommuting[] = {full(oracle::pauli_x()), full(oracle::pauli_y())};
  CHECK_THROWS_AS(context_from_family(noncommuting, reg), NonCommutingFamily);
  CHECK_THROWS_AS(context_from_family(std::span<const AlgebraElement>{}, reg), InvalidArgument);

  const AlgebraElement degenerate[] = {id, id};
  CHECK_THROWS_AS(context_from_family(degenerate, reg), DegenerateSpectrum);
}

TEST_CASE("spin-1 squared family gives the Cartesian basis") {
  ContextRegistry reg;
  const auto sq = spin1_squared_observables();
  // S_x^2 alone is degenerate; completing it with S_z^2 fixes the joint basis.
  CHECK_THROWS_AS(context_from_observable(sq[0], reg), DegenerateSpectrum);
  const AlgebraElement fam[] = {sq[0], sq[2]};
  const auto ctx = context_from_family(fam, reg);
  REQUIRE(ctx->dimension() == 3);
  // Oracle: S_k^2 = I - e_k e_k^T, so the joint eigenvectors are the axes.
  std::set<int> found;
  for (std::size_t k = 0; k < 3; ++k) {
    for (int axis = 0; axis < 3; ++axis) {
      if (same_ray(ctx->vector(k), Vector::Unit(3, axis))) found.insert(axis);
    }
  }
  CHECK(found.size() == 3);
  for (const auto& s : sq) CHECK(contains(*ctx, s));
  const AlgebraElement all3[] = {sq[0], sq[1], sq[2]};
  CHECK(context_from_family(all3, reg)->id == ctx->id);
}

TEST_CASE("random commuting families are simultaneously diagonalized") {
  Rng rng(11);
  ContextRegistry reg;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 7;
    const auto alg = make_full_algebra(static_cast<std::size_t>(n));
    const Matrix u = oracle::random_unitary(n, rng);
    // Two degenerate members whose joint spectrum is simple.
    Vector d1(n), d2(n);
    for (int k = 0; k < n; ++k) {
      d1(k) = static_cast<double>(k / 2);
      d2(k) = static_cast<double>(k % 2);
    }
    const AlgebraElement a(alg, u * d1.asDiagonal() * u.adjoint());
    const AlgebraElement b(alg, u * d2.asDiagonal() * u.adjoint());
    const AlgebraElement fam[] = {a, b};
    const auto ctx = context_from_family(fam, reg);
    CHECK(contains(*ctx, a));
    CHECK(contains(*ctx, b));
    CHECK((ctx->basis.adjoint() * ctx->basis - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    for (int k = 0; k < n; ++k) {
      bool matched = false;
      for (int j = 0; j < n; ++j) matched = matched || same_ray(ctx->vector(k), u.col(j));
      CHECK(matched);
    }
  }
}

TEST_CASE("contains") {
  ContextRegistry reg;
  const auto z = full(oracle::pauli_z());
  const auto ctx = context_from_observable(z, reg);
  CHECK(contains(*ctx, z));
  CHECK_FALSE(contains(*ctx, full(oracle::pauli_x())));
  CHECK(contains(*ctx, AlgebraElement::identity(z.algebra())));
  CHECK_THROWS_AS(contains(*ctx, AlgebraElement::identity(make_full_algebra(3))), DimensionMismatch);
}

TEST_CASE("canonicalization is idempotent bit for bit") {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 8;
    const auto alg = make_full_algebra(static_cast<std::size_t>(n));
    const Matrix u = oracle::random_unitary(n, rng);
    const Matrix g = random_hermitian(alg, rng).matrix();
    const Matrix once = canonicalize_basis(u, g);
    const Matrix twice = canonicalize_basis(once, g);
    CHECK(once == twice);
    for (int k = 0; k < n; ++k) {
      for (int r = 0; r < n; ++r) {
        if (std::abs(once(r, k)) > 1e-10) {
          CHECK(once(r, k).imag() == 0.0);
          CHECK(once(r, k).real() > 0.0);
          break;
        }
      }
    }
  }
}

TEST_CASE("registry identifies bases up to phase, order and tiny perturbations") {
  Rng rng(13);
  ContextRegistry reg;
  const auto alg = make_full_algebra(4);
  const Matrix u = oracle::random_unitary(4, rng);
  const Matrix g = random_hermitian(alg, rng).matrix();
  const auto first = reg.register_basis(alg, u, g);

  Matrix shuffled(4, 4);
  const int perm[] = {2, 0, 3, 1};
  for (int k = 0; k < 4; ++k) shuffled.col(k) = u.col(perm[k]) * std::exp(Complex(0.0, 0.7 * k + 0.1));
  CHECK(reg.register_basis(alg, shuffled, g)->id == first->id);

  Matrix perturbed = u + 1e-11 * oracle::random_complex(4, 4, rng);
  for (int k = 0; k < 4; ++k) {
    for (int j = 0; j < k; ++j) perturbed.col(k) -= perturbed.col(j).dot(perturbed.col(k)) * perturbed.col(j);
    perturbed.col(k).normalize();
  }
  CHECK(reg.register_basis(alg, perturbed, g)->id == first->id);
  CHECK(reg.size() == 1);
  CHECK(reg.find(alg, shuffled)->id == first->id);

  CHECK_THROWS_AS(reg.get(99), UnknownContext);
  CHECK_THROWS_AS(reg.register_basis(alg, 2.0 * u, g), InvalidArgument);
}

TEST_CASE("interpolated generators trace a continuum of contexts") {
  const auto z = full(oracle::pauli_z());
  const auto x = full(oracle::pauli_x());
  CHECK(interpolated_generator(z, x, 0.0).matrix() == z.matrix());
  CHECK((interpolated_generator(z, x, std::numbers::pi / 2).matrix() - x.matrix()).cwiseAbs().maxCoeff() < 1e-15);

  ContextRegistry reg;
  std::set<ContextId> ids;
  for (int k = 1; k <= 100; ++k) {
    const double alpha = std::numbers::pi * k / 101.0;
    ids.insert(context_from_observable(interpolated_generator(z, x, alpha), reg)->id);
  }
  CHECK(ids.size() == 100);
  CHECK(reg.size() == 100);
}

TEST_CASE("context members commute") {
  Rng rng(14);
  ContextRegistry reg;
  for (int trial = 0; trial < 30; ++trial) {
    const auto alg = make_full_algebra(static_cast<std::size_t>(2 + trial % 6));
    const auto ctx = context_from_observable(random_hermitian(alg, rng), reg);
    std::normal_distribution<double> g;
    std::vector<double> va(ctx->dimension()), vb(ctx->dimension());
    for (auto& v : va) v = g(rng);
    for (auto& v : vb) v = g(rng);
    const auto a = ctx->diagonal_element(va);
    const auto b = ctx->diagonal_element(vb);
    CHECK(contains(*ctx, a));
    CHECK(norm(commutator(a, b)) <= 1e-9);
  }
}

TEST_CASE("classical algebra has exactly one context") {
  Rng rng(15);
  ContextRegistry reg;
  const auto alg = make_classical_algebra(4);
  std::set<ContextId> ids;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix d = Matrix::Zero(4, 4);
    std::normal_distribution<double> g;
    for (int k = 0; k < 4; ++k) d(k, k) = g(rng);
    ids.insert(context_from_observable(AlgebraElement(alg, d), reg)->id);
  }
  CHECK(ids.size() == 1);
}

TEST_CASE("block algebra contexts keep vectors inside blocks") {
  ContextRegistry reg;
  const auto alg = make_algebra({2, 1});
  Matrix m = Matrix::Zero(3, 3);
  m.topLeftCorner(2, 2) = oracle::pauli_x();
  m(2, 2) = 1.0;  // equal to an eigenvalue of the other block: allowed
  const auto ctx = context_from_observable(AlgebraElement(alg, m), reg);
  for (std::size_t k = 0; k < 3; ++k) {
    const Vector v = ctx->vector(k);
    const bool upper = v.head(2).norm() > 1e-12;
    const bool lower = std::abs(v(2)) > 1e-12;
    CHECK(upper != lower);
  }
}

TEST_CASE("overlap components realize context intersections") {
  ContextRegistry reg;
  const auto sq = spin1_squared_observables();
  const AlgebraElement f1[] = {sq[0], sq[1], sq[2]};
  const double c = std::sqrt(0.5);
  const auto rot = rotated_squared_family({Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, c, c),
                                           Eigen::Vector3d(0, -c, c)});
  const AlgebraElement f2[] = {rot[0], rot[1], rot[2]};
  const auto a = context_from_family(f1, reg);
  const auto b = context_from_family(f2, reg);
  CHECK(a->id != b->id);
  const auto comps = overlap_components(*a, *b);
  // Shared x axis: one singleton component, the y-z plane is the other.
  CHECK(comps.count == 2);
  const auto same = overlap_components(*a, *a);
  CHECK(same.count == 3);
}

TEST_CASE("registry tolerates concurrent registration") {
  ContextRegistry reg;
  const auto z = full(oracle::pauli_z());
  const auto x = full(oracle::pauli_x());
  std::vector<std::thread> workers;
  std::vector<ContextId> ids(8);
  for (int t = 0; t < 8; ++t) {
    workers.emplace_back([&, t] { ids[t] = context_from_observable(t % 2 ? z : x, reg)->id; });
  }
  for (auto& w : workers) w.join();
  CHECK(reg.size() == 2);
  for (int t = 2; t < 8; ++t) CHECK(ids[t] == ids[t % 2]);
}
