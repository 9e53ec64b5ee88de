#include "oracles.hpp"
#include "qfound/context.hpp"
#include "qfound/ensemble.hpp"
#include "qfound/errors.hpp"
#include "qfound/measurement.hpp"
#include "qfound/random.hpp"

#include <doctest.h>

#include <numbers>

using namespace qfound;

namespace {

// Frame sharing the x axis with the standard one, rotated by `angle` about it.
std::array<Eigen::Vector3d, 3> frame_about_x(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, c, s), Eigen::Vector3d(0, -s, c)};
}

ContextPtr family_context(const std::array<AlgebraElement, 3>& fam, ContextRegistry& reg) {
  return context_from_family(std::span<const AlgebraElement>(fam.data(), fam.size()), reg);
}

Matrix oracle_squared_spin(const Eigen::Vector3d& n) {
  // Independent of the spin matrices: (n.S)^2 = I - n n^T for unit n.
  const Eigen::Vector3d u = n.normalized();
  return (Eigen::Matrix3d::Identity() - u * u.transpose()).cast<Complex>();
}

}  // namespace

TEST_CASE("spin-1 operators satisfy the angular momentum algebra") {
  const auto s = spin1_operators();
  const Complex i(0.0, 1.0);
  for (int k = 0; k < 3; ++k) {
    const int a = (k + 1) % 3;
    const int b = (k + 2) % 3;
    const Matrix lhs = commutator(s[a], s[b]).matrix();
    CHECK((lhs - i * s[k].matrix()).cwiseAbs().maxCoeff() < 1e-15);
    const auto points = spectrum(s[k]);
    REQUIRE(points.size() == 3);
    CHECK(points[0] == doctest::Approx(-1.0));
    CHECK(std::abs(points[1]) < 1e-12);
    CHECK(points[2] == doctest::Approx(1.0));
  }
  const Matrix casimir = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).matrix();
  CHECK((casimir - 2.0 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("squared spin observables") {
  const auto sq = spin1_squared_observables();
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) CHECK(norm(commutator(sq[a], sq[b])) <= 1e-12);
    const auto points = oracle::eigenvalues_general(sq[a].matrix());
    CHECK(std::abs(points[0]) < 1e-12);
    CHECK(std::abs(points[1] - 1.0) < 1e-12);
    CHECK(std::abs(points[2] - 1.0) < 1e-12);
    CHECK((sq[a].matrix() - oracle_squared_spin(Eigen::Vector3d::Unit(a))).cwiseAbs().maxCoeff() < 1e-15);
  }
  const Matrix sum = (sq[0] + sq[1] + sq[2]).matrix();
  CHECK((sum - 2.0 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("rotated squared families") {
  const auto id = rotated_squared_family({Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(),
                                          Eigen::Vector3d::UnitZ()});
  const auto sq = spin1_squared_observables();
  for (int k = 0; k < 3; ++k) CHECK(id[k].matrix() == sq[k].matrix());

  const auto rot = rotated_squared_family(frame_about_x(std::numbers::pi / 4));
  CHECK(fingerprint(rot[0]) == fingerprint(sq[0]));
  CHECK(norm(commutator(sq[1], rot[1])) > 0.1);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) CHECK(norm(commutator(rot[a], rot[b])) <= 1e-12);
  }

  Rng rng(31);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Vector3d n(g(rng), g(rng), g(rng));
    CHECK((squared_spin_along(n).matrix() - oracle_squared_spin(n)).cwiseAbs().maxCoeff() < 1e-12);
  }

  CHECK_THROWS_AS(rotated_squared_family({Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitX(),
                                          Eigen::Vector3d::UnitZ()}),
                  InvalidArgument);
  CHECK_THROWS_AS(squared_spin_along(Eigen::Vector3d::Zero()), InvalidArgument);
}

TEST_CASE("measure rejects observables outside the instrument context") {
  ContextRegistry reg;
  const auto ctx = family_context(spin1_squared_observables(), reg);
  const auto rot = rotated_squared_family(frame_about_x(0.3));
  ElementaryState phi;
  Rng rng(32);
  CHECK_THROWS_AS(measure(phi, {ctx, "xyz"}, rot[1], rng), IncompatibleObservable);
  CHECK(phi.layers().empty());
}

TEST_CASE("back-to-back measurements reproduce the value exactly") {
  Rng rng(33);
  ContextRegistry reg;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 5);
    const auto alg = make_full_algebra(n);
    const auto ctx = context_from_observable(random_hermitian(alg, rng), reg);
    std::uniform_int_distribution<int> small(-1, 1);
    std::vector<double> values(n);
    for (auto& v : values) v = small(rng);
    const auto a = ctx->diagonal_element(values);

    ElementaryState phi;
    if (trial % 2 == 0) phi.attach(random_state(n, rng));
    const Instrument inst{ctx, "i"};
    const double first = measure(phi, inst, a, rng);
    const auto layer = *phi.layer_index(ctx->id);
    const double second = measure(phi, inst, a, rng);
    CHECK(first == second);
    // Clause (i): the acting layer is untouched.
    CHECK(*phi.layer_index(ctx->id) == layer);
    CHECK(is_stable(phi, a));
  }
}

TEST_CASE("a shared observable keeps its value across instruments") {
  ContextRegistry reg;
  const auto sq = spin1_squared_observables();
  const auto xyz = family_context(sq, reg);
  Rng rng(34);
  for (int trial = 0; trial < 100; ++trial) {
    const auto rot = rotated_squared_family(frame_about_x(0.1 + 0.01 * trial));
    const auto other = family_context(rot, reg);
    ElementaryState phi;
    if (trial % 2 == 1) phi.attach(random_state(3, rng));
    const double v1 = measure(phi, {xyz, "xyz"}, sq[0], rng);
    const double v2 = measure(phi, {other, "xy'z'"}, rot[0], rng);
    CHECK(v1 == v2);
    // Back again: still the same.
    CHECK(measure(phi, {xyz, "xyz"}, sq[0], rng) == v1);
  }
}

TEST_CASE("stability persists in contexts containing the observable") {
  ContextRegistry reg;
  const auto sq = spin1_squared_observables();
  const auto xyz = family_context(sq, reg);
  Rng rng(35);
  ElementaryState phi;
  phi.attach(random_state(3, rng));
  const double v = measure(phi, {xyz, "xyz"}, sq[0], rng);
  const std::string fp = fingerprint(sq[0]);
  for (int step = 0; step < 40; ++step) {
    const auto rot = rotated_squared_family(frame_about_x(0.05 * (step + 1)));
    const auto other = family_context(rot, reg);
    measure(phi, {other, "r"}, rot[1 + step % 2], rng);
    const auto& stable = phi.stable_observables();
    CHECK(stable.count(fp) == 1);
    CHECK(evaluate(phi, *other, sq[0]) == v);
  }
}

TEST_CASE("previously stable observables of the acting context remain stable") {
  ContextRegistry reg;
  const auto sq = spin1_squared_observables();
  const auto xyz = family_context(sq, reg);
  Rng rng(36);
  for (int trial = 0; trial < 50; ++trial) {
    ElementaryState phi;
    phi.attach(random_state(3, rng));
    const double vx = measure(phi, {xyz, "xyz"}, sq[0], rng);
    const double vy = measure(phi, {xyz, "xyz"}, sq[1], rng);
    CHECK(phi.stable_observables().size() == 2);
    CHECK(evaluate(phi, *xyz, sq[0]) == vx);
    CHECK(evaluate(phi, *xyz, sq[1]) == vy);
    // Exactly one zero in a triad.
    CHECK(vx + vy + evaluate(phi, *xyz, sq[2]) == 2.0);
  }
}

TEST_CASE("other layers are dropped and lazily resampled") {
  ContextRegistry reg;
  const auto sq = spin1_squared_observables();
  const auto xyz = family_context(sq, reg);
  const auto rot = rotated_squared_family(frame_about_x(0.7));
  const auto other = family_context(rot, reg);
  Rng rng(37);
  ElementaryState phi;
  phi.set_layer(xyz, 0);
  phi.set_layer(other, 1);
  measure(phi, {xyz, "xyz"}, sq[2], rng);
  CHECK(phi.layers().size() == 1);
  CHECK(phi.layer_index(xyz->id).has_value());
}

TEST_CASE("attached quantum state is projected onto the outcome") {
  ContextRegistry reg;
  const auto sq = spin1_squared_observables();
  const auto xyz = family_context(sq, reg);
  Rng rng(38);
  for (int trial = 0; trial < 50; ++trial) {
    ElementaryState phi;
    const auto psi = random_state(3, rng);
    phi.attach(psi);
    const double v = measure(phi, {xyz, "xyz"}, sq[2], rng);
    REQUIRE(phi.quantum_state().has_value());
    // Oracle projector: S_z^2 = 1 on span(e_x, e_y), 0 on e_z.
    Matrix p = Matrix::Zero(3, 3);
    if (v == 1.0) {
      p(0, 0) = 1.0;
      p(1, 1) = 1.0;
    } else {
      p(2, 2) = 1.0;
    }
    const Vector expected = (p * psi.vector()).normalized();
    const Vector got = phi.quantum_state()->vector();
    CHECK(std::abs(std::abs(expected.dot(got)) - 1.0) < 1e-12);
    // Rank-one outcome fixes the home context.
    CHECK((phi.quantum_state()->home_context() != nullptr) == (v == 0.0));
  }

  // Zero Born weight: the state detaches.
  ElementaryState phi;
  phi.attach(QuantumState(Vector::Unit(3, 2)));
  std::size_t in_plane = 0;
  while (evaluate_at(*xyz, in_plane, sq[2]) != 1.0) ++in_plane;
  phi.set_layer(xyz, in_plane);
  CHECK(measure(phi, {xyz, "xyz"}, sq[2], rng) == 1.0);
  CHECK_FALSE(phi.quantum_state().has_value());
}

TEST_CASE("run_sequence examples") {
  ContextRegistry reg;
  const auto sq = spin1_squared_observables();
  const auto xyz = family_context(sq, reg);
  const Instrument inst{xyz, "xyz"};
  Rng rng(39);

  CHECK_THROWS_AS(run_sequence(ElementaryState{}, {}, rng), InvalidArgument);

  for (int trial = 0; trial < 50; ++trial) {
    ElementaryState phi0;
    phi0.attach(random_state(3, rng));
    const PlanStep twice[] = {{inst, sq[0]}, {inst, sq[0]}};
    const auto r1 = run_sequence(phi0, twice, rng);
    CHECK(r1[0].value == r1[1].value);

    const PlanStep abab[] = {{inst, sq[0]}, {inst, sq[1]}, {inst, sq[0]}, {inst, sq[1]}};
    const auto r2 = run_sequence(phi0, abab, rng);
    CHECK(r2[0].value == r2[2].value);
    CHECK(r2[1].value == r2[3].value);
    for (std::size_t k = 0; k < r2.size(); ++k) {
      CHECK(r2[k].step == k);
      CHECK(r2[k].instrument == xyz->id);
      CHECK(std::is_sorted(r2[k].post_stable.begin(), r2[k].post_stable.end()));
    }
    CHECK(r2[3].post_stable.size() == 2);
    // phi0 is not modified.
    CHECK(phi0.layers().empty());
  }
}

TEST_CASE("alternating incompatible instruments break repetition in some runs") {
  ContextRegistry reg;
  const auto sq = spin1_squared_observables();
  const auto xyz = family_context(sq, reg);
  const auto rot = rotated_squared_family(frame_about_x(std::numbers::pi / 4));
  const auto other = family_context(rot, reg);
  const PlanStep plan[] = {{{xyz, "xyz"}, sq[1]}, {{other, "rot"}, rot[1]}, {{xyz, "xyz"}, sq[1]}};
  int violations = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng = make_stream(40, seed);
    ElementaryState phi0;
    phi0.attach(random_state(3, rng));
    const auto rec = run_sequence(phi0, plan, rng);
    if (rec[0].value != rec[2].value) ++violations;
    for (const auto& r : rec) CHECK((r.value == 0.0 || r.value == 1.0));
  }
  CHECK(violations > 0);
}

TEST_CASE("measurement order changes single outcomes but reveals one value per run") {
  ContextRegistry reg;
  const auto sq = spin1_squared_observables();
  const auto xyz = family_context(sq, reg);
  const auto rot = rotated_squared_family(frame_about_x(0.4));
  const auto other = family_context(rot, reg);
  int differing = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    ElementaryState phi0;
    Rng setup = make_stream(41, seed);
    phi0.attach(random_state(3, setup));
    Rng r1 = make_stream(42, seed);
    Rng r2 = make_stream(44, seed);
    const PlanStep forward[] = {{{xyz, "xyz"}, sq[0]}, {{other, "rot"}, rot[0]}};
    const PlanStep backward[] = {{{other, "rot"}, rot[0]}, {{xyz, "xyz"}, sq[0]}};
    const auto a = run_sequence(phi0, forward, r1);
    const auto b = run_sequence(phi0, backward, r2);
    // Within one run the shared observable shows a single value.
    CHECK(a[0].value == a[1].value);
    CHECK(b[0].value == b[1].value);
    if (a[0].value != b[0].value) ++differing;
  }
  CHECK(differing > 0);
}

TEST_CASE("measurement statistics follow the Born rule") {
  ContextRegistry reg;
  const auto sq = spin1_squared_observables();
  const auto xyz = family_context(sq, reg);
  Vector v(3);
  v << 0.6, 0.0, 0.8;
  const QuantumState psi(v);
  const auto born = born_distribution(psi, *xyz);
  std::size_t zero_count = 0;
  const std::size_t runs = 20000;
  for (std::uint64_t seed = 0; seed < runs; ++seed) {
    Rng rng = make_stream(43, seed);
    ElementaryState phi;
    phi.attach(psi);
    if (measure(phi, {xyz, "xyz"}, sq[2], rng) == 0.0) ++zero_count;
  }
  // P(S_z^2 = 0) = |<e_z, psi>|^2 = 0.64.
  double pz = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    if (evaluate_at(*xyz, k, sq[2]) == 0.0) pz += born[k];
  }
  CHECK(pz == doctest::Approx(0.64));
  const double se = std::sqrt(0.64 * 0.36 / runs);
  CHECK(std::abs(static_cast<double>(zero_count) / runs - 0.64) < 5.0 * se);
}
