#pragma once

// Multilayer functionals: one character (joint-eigenvector selection) per
// context, with a record of the observables on which the state is stable.

#include "qfound/algebra.hpp"
#include "qfound/context.hpp"
#include "qfound/quantum_state.hpp"
#include "qfound/rng.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qfound {

struct Character {
  ContextId context_id;
  std::size_t index;
};

struct Layer {
  ContextPtr context;
  std::size_t index;
};

struct StableObservable {
  AlgebraElement observable;
  double value;
};

class ElementaryState {
 public:
  ElementaryState() = default;
  explicit ElementaryState(std::uint64_t rng_stream) : rng_stream_(rng_stream) {}

  const std::map<ContextId, Layer>& layers() const { return layers_; }
  std::optional<std::size_t> layer_index(ContextId id) const;
  std::optional<Character> character(ContextId id) const;
  void set_layer(const ContextPtr& ctx, std::size_t index);
  /// Drops every layer except the one of `keep`.
  void drop_layers_except(ContextId keep);

  /// Observables on which agreement across contexts is enforced, keyed by fingerprint.
  const std::map<std::string, StableObservable>& stable_observables() const { return stable_; }
  /// Contexts on whose whole subalgebra the state is stable.
  const std::map<ContextId, Layer>& stable_contexts() const { return stable_contexts_; }
  void mark_stable(const AlgebraElement& observable, double value);
  void mark_context_stable(const ContextPtr& ctx, std::size_t index);
  void erase_stable(const std::string& fingerprint) { stable_.erase(fingerprint); }
  void erase_stable_context(ContextId id) { stable_contexts_.erase(id); }
  /// Sorted fingerprints of the stable observables.
  std::vector<std::string> stable_fingerprints() const;

  const std::optional<QuantumState>& quantum_state() const { return state_; }
  /// Attaches the state to a new ensemble. Clears all stability records.
  void attach(QuantumState psi);
  /// Replaces the conditioning state without touching stability.
  void condition_on(std::optional<QuantumState> psi) { state_ = std::move(psi); }
  /// True once stability has been reset by attaching a quantum state.
  bool stability_reset() const { return stability_reset_; }

  std::uint64_t rng_stream() const { return rng_stream_; }

 private:
  std::map<ContextId, Layer> layers_;
  std::map<std::string, StableObservable> stable_;
  std::map<ContextId, Layer> stable_contexts_;
  std::optional<QuantumState> state_;
  bool stability_reset_ = false;
  std::uint64_t rng_stream_ = 0;
};

/// Eigenvalue of `a` at basis vector `index` of `ctx`, snapped to the nearest
/// point of spectrum(a). Throws IncompatibleObservable if a is not in ctx.
double evaluate_at(const Context& ctx, std::size_t index, const AlgebraElement& a);

/// Raw Rayleigh quotient <e_k, A e_k> without snapping.
double rayleigh_at(const Context& ctx, std::size_t index, const AlgebraElement& a);

/// Throws IncompatibleObservable, or MissingLayer when phi has no layer for ctx.
double evaluate(const ElementaryState& phi, const Context& ctx, const AlgebraElement& a);

/// Character indices of ctx consistent with every stability record of phi.
std::vector<std::size_t> admissible_indices(const ElementaryState& phi, const Context& ctx);

/// Selection weights for a new layer: Born weights of the attached state
/// restricted to the admissible indices, uniform over them when the state has
/// no weight there or none is attached.
std::vector<double> layer_weights(const ElementaryState& phi, const Context& ctx);

/// Returns the layer index of ctx, creating the layer from layer_weights if absent.
std::size_t ensure_layer(ElementaryState& phi, const ContextPtr& ctx, Rng& rng);

/// State with exactly the given layers. Throws UnknownContext / InvalidArgument.
ElementaryState construct_state(const std::map<ContextId, std::size_t>& assignments,
                                const ContextRegistry& registry);

/// Picks one index out of a nonempty admissible set.
using ComplementChooser = std::function<std::size_t(std::span<const std::size_t>)>;

ComplementChooser choose_lowest();
ComplementChooser choose_random(Rng& rng);

/// Builds a state stable on every observable of `ctx`: each other context
/// copies the values on the shared subalgebra and picks the rest with `choose`.
ElementaryState construct_stable_on(const ContextPtr& ctx, std::size_t index,
                                    std::span<const ContextPtr> other_contexts,
                                    const ComplementChooser& choose = choose_lowest());

/// True iff every stored layer whose context contains `a` gives the same value.
bool is_stable(const ElementaryState& phi, const AlgebraElement& a);

struct CharacterReport {
  std::size_t samples = 0;
  double zero_residual = 0.0;             // |phi(0)|
  double unit_residual = 0.0;             // |phi(I) - 1|
  double min_square_value = 0.0;          // min phi(A^2)
  double spectrum_residual = 0.0;         // max distance of <e_k,Ae_k> to spectrum(A)
  bool spectrum_exhausted = true;         // every spectrum point attained by some index
  double multiplicativity_residual = 0.0; // max |phi(AB) - phi(A)phi(B)|
  double linearity_residual = 0.0;        // max |phi(aA+bB) - a phi(A) - b phi(B)|

  bool passed(double tolerance = 1e-9) const;
};

/// Checks the character properties of phi's layer on ctx over random elements
/// of the context.
CharacterReport check_character_properties(const ElementaryState& phi, const Context& ctx,
                                           std::size_t samples, Rng& rng);

}  // namespace qfound
