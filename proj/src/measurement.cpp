#include "qfound/measurement.hpp"

#include "qfound/errors.hpp"

#include <cmath>

namespace qfound {

namespace {

// Eigenprojector of `a` at the spectral point nearest `value`; ties go to the
// lower eigenvalue.
AlgebraElement eigenprojector_at(const AlgebraElement& a, double value) {
  const auto dec = spectral_decomposition(a);
  const SpectralPair* best = &dec.pairs.front();
  for (const auto& pair : dec.pairs) {
    if (std::abs(pair.eigenvalue - value) < std::abs(best->eigenvalue - value)) best = &pair;
  }
  return best->projector;
}

}  // namespace

double measure(ElementaryState& phi, const Instrument& instrument, const AlgebraElement& a,
               Rng& rng) {
  const ContextPtr& ctx = instrument.context;
  if (!contains(*ctx, a)) {
    throw IncompatibleObservable("observable " + fingerprint(a) + " is not measurable by instrument '" +
                                 instrument.label + "'");
  }
  ensure_layer(phi, ctx, rng);
  const double value = evaluate(phi, *ctx, a);

  std::vector<std::string> dropped;
  for (const auto& [fp, rec] : phi.stable_observables()) {
    if (!contains(*ctx, rec.observable)) dropped.push_back(fp);
  }
  for (const auto& fp : dropped) phi.erase_stable(fp);

  // Stability on another context survives only on its intersection with the
  // acting context, which the overlap-component projectors generate.
  std::vector<ContextId> converted;
  std::vector<StableObservable> inherited;
  for (const auto& [id, layer] : phi.stable_contexts()) {
    if (id == ctx->id) continue;
    converted.push_back(id);
    const auto comps = overlap_components(*layer.context, *ctx);
    if (comps.count < 2) continue;
    const std::size_t target = comps.from_label[layer.index];
    std::vector<double> indicator(ctx->dimension(), 0.0);
    for (std::size_t j = 0; j < ctx->dimension(); ++j) indicator[j] = comps.to_label[j] == target;
    inherited.push_back({ctx->diagonal_element(indicator), 1.0});
  }
  for (ContextId id : converted) phi.erase_stable_context(id);
  for (const auto& rec : inherited) phi.mark_stable(rec.observable, rec.value);

  phi.mark_stable(a, value);
  phi.drop_layers_except(ctx->id);

  if (const auto& psi = phi.quantum_state()) {
    const AlgebraElement p = eigenprojector_at(a, value);
    const Vector projected = p.matrix() * psi->vector();
    if (projected.norm() < 1e-12) {
      phi.condition_on(std::nullopt);
    } else {
      const bool rank_one = std::abs(p.matrix().trace().real() - 1.0) < 1e-9;
      phi.condition_on(QuantumState(projected, rank_one ? ctx : nullptr));
    }
  }
  return value;
}

std::vector<MeasurementRecord> run_sequence(const ElementaryState& phi0,
                                            std::span<const PlanStep> plan, Rng& rng) {
  if (plan.empty()) throw InvalidArgument("measurement plan is empty");
  ElementaryState phi = phi0;
  std::vector<MeasurementRecord> out;
  out.reserve(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& step = plan[i];
    MeasurementRecord rec;
    rec.step = i;
    rec.instrument = step.instrument.context->id;
    rec.label = step.instrument.label;
    rec.observable = fingerprint(step.observable);
    rec.value = measure(phi, step.instrument, step.observable, rng);
    rec.post_stable = phi.stable_fingerprints();
    out.push_back(std::move(rec));
  }
  return out;
}

AlgebraPtr spin1_algebra() {
  static const AlgebraPtr algebra = make_full_algebra(3);
  return algebra;
}

std::array<AlgebraElement, 3> spin1_operators() {
  const Complex i(0.0, 1.0);
  std::array<Matrix, 3> s;
  for (auto& m : s) m = Matrix::Zero(3, 3);
  // eps_{kij} = +1 for cyclic (k, i, j).
  for (int k = 0; k < 3; ++k) {
    const int a = (k + 1) % 3;
    const int b = (k + 2) % 3;
    s[k](a, b) = -i;
    s[k](b, a) = i;
  }
  const auto alg = spin1_algebra();
  return {AlgebraElement(alg, s[0]), AlgebraElement(alg, s[1]), AlgebraElement(alg, s[2])};
}

AlgebraElement squared_spin_along(const Eigen::Vector3d& n) {
  const double len = n.norm();
  if (!(len > 0.0)) throw InvalidArgument("spin axis must be nonzero");
  const Eigen::Vector3d u = n / len;
  const auto s = spin1_operators();
  AlgebraElement sn = Complex(u.x()) * s[0] + Complex(u.y()) * s[1] + Complex(u.z()) * s[2];
  return sn * sn;
}

std::array<AlgebraElement, 3> spin1_squared_observables() {
  return rotated_squared_family({Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(),
                                 Eigen::Vector3d::UnitZ()});
}

std::array<AlgebraElement, 3> rotated_squared_family(const std::array<Eigen::Vector3d, 3>& frame) {
  Eigen::Matrix3d f;
  for (int k = 0; k < 3; ++k) f.col(k) = frame[k];
  const double defect = (f.transpose() * f - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (defect > 1e-10) {
    throw InvalidArgument("spin frame is not orthonormal (defect " + std::to_string(defect) + ")");
  }
  return {squared_spin_along(frame[0]), squared_spin_along(frame[1]), squared_spin_along(frame[2])};
}

}  // namespace qfound
