#include "qfound/elementary_state.hpp"

#include "qfound/ensemble.hpp"
#include "qfound/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qfound {

std::optional<std::size_t> ElementaryState::layer_index(ContextId id) const {
  auto it = layers_.find(id);
  if (it == layers_.end()) return std::nullopt;
  return it->second.index;
}

std::optional<Character> ElementaryState::character(ContextId id) const {
  auto idx = layer_index(id);
  if (!idx) return std::nullopt;
  return Character{id, *idx};
}

void ElementaryState::set_layer(const ContextPtr& ctx, std::size_t index) {
  if (index >= ctx->dimension()) {
    throw InvalidArgument("character index " + std::to_string(index) + " out of range for context " +
                          std::to_string(ctx->id));
  }
  layers_.insert_or_assign(ctx->id, Layer{ctx, index});
}

void ElementaryState::drop_layers_except(ContextId keep) {
  std::erase_if(layers_, [keep](const auto& kv) { return kv.first != keep; });
}

void ElementaryState::mark_stable(const AlgebraElement& observable, double value) {
  stable_.insert_or_assign(fingerprint(observable), StableObservable{observable, value});
}

void ElementaryState::mark_context_stable(const ContextPtr& ctx, std::size_t index) {
  stable_contexts_.insert_or_assign(ctx->id, Layer{ctx, index});
}

std::vector<std::string> ElementaryState::stable_fingerprints() const {
  std::vector<std::string> out;
  out.reserve(stable_.size());
  for (const auto& [fp, _] : stable_) out.push_back(fp);
  return out;
}

void ElementaryState::attach(QuantumState psi) {
  state_ = std::move(psi);
  stable_.clear();
  stable_contexts_.clear();
  stability_reset_ = true;
}

double rayleigh_at(const Context& ctx, std::size_t index, const AlgebraElement& a) {
  if (index >= ctx.dimension()) throw InvalidArgument("character index out of range");
  const Vector v = ctx.vector(index);
  return (v.adjoint() * a.matrix() * v)(0, 0).real();
}

double evaluate_at(const Context& ctx, std::size_t index, const AlgebraElement& a) {
  if (!contains(ctx, a)) {
    throw IncompatibleObservable("observable " + fingerprint(a) + " is not in context " +
                                 std::to_string(ctx.id));
  }
  const double raw = rayleigh_at(ctx, index, a);
  const auto points = spectrum(a);
  double best = points.front();
  for (double p : points) {
    if (std::abs(p - raw) < std::abs(best - raw)) best = p;
  }
  return best;
}

double evaluate(const ElementaryState& phi, const Context& ctx, const AlgebraElement& a) {
  if (!contains(ctx, a)) {
    throw IncompatibleObservable("observable " + fingerprint(a) + " is not in context " +
                                 std::to_string(ctx.id));
  }
  const auto idx = phi.layer_index(ctx.id);
  if (!idx) throw MissingLayer("no layer for context " + std::to_string(ctx.id));
  return evaluate_at(ctx, *idx, a);
}

std::vector<std::size_t> admissible_indices(const ElementaryState& phi, const Context& ctx) {
  const std::size_t n = ctx.dimension();
  std::vector<bool> ok(n, true);
  for (const auto& [fp, rec] : phi.stable_observables()) {
    if (!contains(ctx, rec.observable)) continue;
    const double scale = std::max(1.0, rec.observable.max_abs());
    for (std::size_t j = 0; j < n; ++j) {
      if (ok[j] && std::abs(rayleigh_at(ctx, j, rec.observable) - rec.value) >
                       kMembershipTolerance * scale) {
        ok[j] = false;
      }
    }
  }
  for (const auto& [id, layer] : phi.stable_contexts()) {
    if (id == ctx.id) {
      for (std::size_t j = 0; j < n; ++j) ok[j] = ok[j] && j == layer.index;
      continue;
    }
    const auto comps = overlap_components(*layer.context, ctx);
    const std::size_t target = comps.from_label[layer.index];
    for (std::size_t j = 0; j < n; ++j) ok[j] = ok[j] && comps.to_label[j] == target;
  }
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n; ++j) {
    if (ok[j]) out.push_back(j);
  }
  return out;
}

std::vector<double> layer_weights(const ElementaryState& phi, const Context& ctx) {
  const auto admissible = admissible_indices(phi, ctx);
  std::vector<double> w(ctx.dimension(), 0.0);
  if (admissible.empty()) return w;
  double total = 0.0;
  if (const auto& psi = phi.quantum_state()) {
    const auto born = born_distribution(*psi, ctx);
    for (std::size_t j : admissible) {
      w[j] = born[j];
      total += born[j];
    }
  }
  if (!(total > 1e-14)) {
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t j : admissible) w[j] = 1.0;
  }
  return w;
}

std::size_t ensure_layer(ElementaryState& phi, const ContextPtr& ctx, Rng& rng) {
  if (auto idx = phi.layer_index(ctx->id)) return *idx;
  auto w = layer_weights(phi, *ctx);
  if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) {
    throw Error("no character of context " + std::to_string(ctx->id) +
                " is consistent with the stability records");
  }
  // Born weights below 1e-15 are rounding noise on exact zeros.
  double top = *std::max_element(w.begin(), w.end());
  for (double& x : w) {
    if (x < 1e-15 * top) x = 0.0;
  }
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  const std::size_t k = pick(rng);
  phi.set_layer(ctx, k);
  return k;
}

ElementaryState construct_state(const std::map<ContextId, std::size_t>& assignments,
                                const ContextRegistry& registry) {
  ElementaryState phi;
  for (const auto& [id, index] : assignments) phi.set_layer(registry.get(id), index);
  return phi;
}

ComplementChooser choose_lowest() {
  return [](std::span<const std::size_t> admissible) { return admissible.front(); };
}

ComplementChooser choose_random(Rng& rng) {
  return [&rng](std::span<const std::size_t> admissible) {
    std::uniform_int_distribution<std::size_t> pick(0, admissible.size() - 1);
    return admissible[pick(rng)];
  };
}

ElementaryState construct_stable_on(const ContextPtr& ctx, std::size_t index,
                                    std::span<const ContextPtr> other_contexts,
                                    const ComplementChooser& choose) {
  ElementaryState phi;
  phi.set_layer(ctx, index);
  phi.mark_context_stable(ctx, index);
  for (const auto& other : other_contexts) {
    if (phi.layer_index(other->id)) continue;
    // Shared generators keep the seed's values; the complement is free.
    const auto admissible = admissible_indices(phi, *other);
    const std::size_t k = choose(admissible);
    if (std::find(admissible.begin(), admissible.end(), k) == admissible.end()) {
      throw InvalidArgument("complement chooser returned an inadmissible index");
    }
    phi.set_layer(other, k);
  }
  return phi;
}

bool is_stable(const ElementaryState& phi, const AlgebraElement& a) {
  std::optional<double> first;
  for (const auto& [id, layer] : phi.layers()) {
    if (!contains(*layer.context, a)) continue;
    const double v = evaluate_at(*layer.context, layer.index, a);
    if (!first) {
      first = v;
    } else if (std::abs(*first - v) > kMembershipTolerance * std::max(1.0, a.max_abs())) {
      return false;
    }
  }
  return true;
}

bool CharacterReport::passed(double tolerance) const {
  return zero_residual <= tolerance && unit_residual <= tolerance &&
         min_square_value >= -tolerance && spectrum_residual <= tolerance && spectrum_exhausted &&
         multiplicativity_residual <= tolerance && linearity_residual <= tolerance;
}

namespace {

// Random element of the context: real eigenvalues on the context basis, half
// of the draws from a small set so that degenerate spectra are exercised.
AlgebraElement random_context_element(const Context& ctx, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> small(-1, 2);
  const bool degenerate = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
  std::vector<double> values(ctx.dimension());
  for (double& v : values) v = degenerate ? small(rng) : gauss(rng);
  return ctx.diagonal_element(values);
}

double distance_to(const std::vector<double>& points, double x) {
  double best = std::numeric_limits<double>::infinity();
  for (double p : points) best = std::min(best, std::abs(p - x));
  return best;
}

}  // namespace

CharacterReport check_character_properties(const ElementaryState& phi, const Context& ctx,
                                           std::size_t samples, Rng& rng) {
  const auto idx = phi.layer_index(ctx.id);
  if (!idx) throw MissingLayer("no layer for context " + std::to_string(ctx.id));
  const std::size_t k = *idx;
  CharacterReport rep;
  rep.samples = samples;
  rep.zero_residual = std::abs(evaluate_at(ctx, k, AlgebraElement::zero(ctx.algebra)));
  rep.unit_residual = std::abs(evaluate_at(ctx, k, AlgebraElement::identity(ctx.algebra)) - 1.0);
  rep.min_square_value = std::numeric_limits<double>::infinity();
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (std::size_t s = 0; s < samples; ++s) {
    const AlgebraElement a = random_context_element(ctx, rng);
    const AlgebraElement b = random_context_element(ctx, rng);
    const double fa = evaluate_at(ctx, k, a);
    const double fb = evaluate_at(ctx, k, b);

    rep.min_square_value = std::min(rep.min_square_value, evaluate_at(ctx, k, a * a));

    const auto points = spectrum(a);
    rep.spectrum_residual = std::max(rep.spectrum_residual, distance_to(points, rayleigh_at(ctx, k, a)));

    std::vector<double> attained;
    for (std::size_t j = 0; j < ctx.dimension(); ++j) attained.push_back(evaluate_at(ctx, j, a));
    for (double p : points) {
      if (distance_to(attained, p) > 1e-9 * std::max(1.0, std::abs(p))) rep.spectrum_exhausted = false;
    }

    rep.multiplicativity_residual =
        std::max(rep.multiplicativity_residual, std::abs(evaluate_at(ctx, k, a * b) - fa * fb));

    const double ca = gauss(rng);
    const double cb = gauss(rng);
    const AlgebraElement combo = Complex(ca) * a + Complex(cb) * b;
    rep.linearity_residual =
        std::max(rep.linearity_residual, std::abs(evaluate_at(ctx, k, combo) - ca * fa - cb * fb));
  }
  if (samples == 0) rep.min_square_value = 0.0;
  return rep;
}

}  // namespace qfound
