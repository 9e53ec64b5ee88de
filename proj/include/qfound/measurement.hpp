#pragma once

#include "qfound/algebra.hpp"
#include "qfound/context.hpp"
#include "qfound/elementary_state.hpp"
#include "qfound/rng.hpp"

#include <Eigen/Dense>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace qfound {

/// A measuring apparatus acting on one context.
struct Instrument {
  ContextPtr context;
  std::string label;
};

struct PlanStep {
  Instrument instrument;
  AlgebraElement observable;
};

struct MeasurementRecord {
  std::size_t step = 0;
  ContextId instrument = 0;
  std::string label;
  std::string observable;                // fingerprint
  double value = 0.0;
  std::vector<std::string> post_stable;  // sorted fingerprints after the step
};

/// Measures `a` with `instrument`. Afterwards phi keeps only the acting
/// layer, is stable on `a` at the returned value and on those previously
/// stable observables that lie in the instrument's context. An attached
/// quantum state is replaced by its eigenprojection at the outcome.
/// Throws IncompatibleObservable if `a` is not in the instrument's context.
double measure(ElementaryState& phi, const Instrument& instrument, const AlgebraElement& a,
               Rng& rng);

/// Runs a nonempty plan on a copy of phi0.
std::vector<MeasurementRecord> run_sequence(const ElementaryState& phi0,
                                            std::span<const PlanStep> plan, Rng& rng);

AlgebraPtr spin1_algebra();

/// Spin-1 components in the Cartesian basis: (S_k)_{ij} = -i eps_{kij}.
std::array<AlgebraElement, 3> spin1_operators();

/// S_n^2 = I - n n^T for the unit vector along n.
AlgebraElement squared_spin_along(const Eigen::Vector3d& n);

/// (S_x^2, S_y^2, S_z^2): commuting, each with spectrum {0, 1}, summing to 2I.
std::array<AlgebraElement, 3> spin1_squared_observables();

/// Squared spin components along an orthonormal frame. Throws InvalidArgument
/// if the frame is not orthonormal within 1e-10.
std::array<AlgebraElement, 3> rotated_squared_family(const std::array<Eigen::Vector3d, 3>& frame);

}  // namespace qfound
