#pragma once

// Born-consistent ensembles of elementary states. Each context carries its
// own probability space over character indices; no joint law across
// incompatible contexts is exposed.

#include "qfound/algebra.hpp"
#include "qfound/context.hpp"
#include "qfound/elementary_state.hpp"
#include "qfound/quantum_state.hpp"
#include "qfound/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qfound {

/// p_k = |<e_k, tau>|^2. Throws DimensionMismatch.
std::vector<double> born_distribution(const QuantumState& psi, const Context& ctx);

/// Draws every requested context's index from its Born distribution. The home
/// context, if any, is drawn first and recorded as stable.
ElementaryState sample_elementary_state(const QuantumState& psi, std::span<const ContextPtr> contexts,
                                        Rng& rng);

struct EnsembleReport {
  std::string observable;  // fingerprint
  ContextId context = 0;
  std::size_t sample_count = 0;
  double empirical_mean = 0.0;
  double exact_mean = 0.0;
  double standard_error = 0.0;          // sample sd / sqrt(N)
  std::vector<double> spectrum;         // ascending
  std::vector<std::size_t> histogram;   // counts per spectrum point
  double sum = 0.0;                     // running sums, for merging
  double sum_squares = 0.0;

  /// |empirical - exact| <= k * standard_error; an exact match always passes.
  bool within(double k) const;
};

/// Merges partial reports over the same observable and context.
EnsembleReport merge_reports(std::span<const EnsembleReport> parts);

/// Throws IncompatibleObservable, or InvalidArgument when n == 0.
EnsembleReport ensemble_average(const QuantumState& psi, const AlgebraElement& a,
                                const ContextPtr& ctx, std::size_t n, Rng& rng);

/// Splits n over `partitions` threads; partition p draws from make_stream(seed, p).
EnsembleReport parallel_ensemble_average(const QuantumState& psi, const AlgebraElement& a,
                                         const ContextPtr& ctx, std::size_t n,
                                         std::uint64_t master_seed, std::size_t partitions);

/// Re trace(p_tau A). Throws NotHermitian.
double quantum_average_exact(const QuantumState& psi, const AlgebraElement& a);

/// <tau, R tau> for an arbitrary element.
Complex expectation(const QuantumState& psi, const AlgebraElement& r);

/// |Psi(A+B) - Psi(A) - Psi(B)|.
double postulate6_linearity_check(const QuantumState& psi, const AlgebraElement& a,
                                  const AlgebraElement& b);

struct ConsistencyReport {
  std::size_t sample_count = 0;
  std::vector<double> thresholds;       // spectrum points of A
  std::vector<double> exact_cdf_1, exact_cdf_2;
  std::vector<double> empirical_cdf_1, empirical_cdf_2;
  std::vector<double> pooled_standard_error;
  double max_exact_gap = 0.0;           // max |exact_1 - exact_2|
  double max_standard_score = 0.0;      // max |emp_1 - emp_2| / pooled se
  bool exact_agrees = true;             // max_exact_gap <= 1e-12
  bool statistical_agrees = true;       // every gap within 4 pooled se

  bool passed() const { return exact_agrees && statistical_agrees; }
};

/// Compares P(phi(A) <= t) computed in two contexts at every spectrum point t.
/// Each context samples from a stream derived from one draw of rng and its id,
/// so equal contexts give identical runs. Throws IncompatibleObservable.
ConsistencyReport postulate5_consistency_check(const QuantumState& psi, const AlgebraElement& a,
                                               const ContextPtr& ctx1, const ContextPtr& ctx2,
                                               std::size_t n, Rng& rng);

}  // namespace qfound
