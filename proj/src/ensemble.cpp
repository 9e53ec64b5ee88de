#include "qfound/ensemble.hpp"

#include "qfound/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace qfound {

std::vector<double> born_distribution(const QuantumState& psi, const Context& ctx) {
  if (psi.dimension() != ctx.dimension()) {
    throw DimensionMismatch("state of dimension " + std::to_string(psi.dimension()) +
                            " against context of dimension " + std::to_string(ctx.dimension()));
  }
  const Eigen::VectorXd p = (ctx.basis.adjoint() * psi.vector()).cwiseAbs2();
  return {p.data(), p.data() + p.size()};
}

ElementaryState sample_elementary_state(const QuantumState& psi, std::span<const ContextPtr> contexts,
                                        Rng& rng) {
  ElementaryState phi;
  phi.attach(psi);
  if (const auto& home = psi.home_context()) {
    const std::size_t k = ensure_layer(phi, home, rng);
    phi.mark_context_stable(home, k);
  }
  for (const auto& ctx : contexts) ensure_layer(phi, ctx, rng);
  return phi;
}

bool EnsembleReport::within(double k) const {
  const double gap = std::abs(empirical_mean - exact_mean);
  return gap == 0.0 || gap <= k * standard_error + 1e-12;
}

namespace {

void finish(EnsembleReport& r) {
  const double n = static_cast<double>(r.sample_count);
  r.empirical_mean = r.sum / n;
  if (r.sample_count > 1) {
    const double var = std::max(0.0, (r.sum_squares - n * r.empirical_mean * r.empirical_mean) / (n - 1.0));
    r.standard_error = std::sqrt(var / n);
  } else {
    r.standard_error = 0.0;
  }
}

struct PreparedObservable {
  std::vector<double> points;
  std::vector<double> value_at;          // per character index
  std::vector<std::size_t> bin_at;       // spectrum bin per character index
};

PreparedObservable prepare(const AlgebraElement& a, const Context& ctx) {
  if (!contains(ctx, a)) {
    throw IncompatibleObservable("observable " + fingerprint(a) + " is not in context " +
                                 std::to_string(ctx.id));
  }
  PreparedObservable p;
  p.points = spectrum(a);
  for (std::size_t k = 0; k < ctx.dimension(); ++k) {
    const double v = evaluate_at(ctx, k, a);
    p.value_at.push_back(v);
    p.bin_at.push_back(static_cast<std::size_t>(
        std::find(p.points.begin(), p.points.end(), v) - p.points.begin()));
  }
  return p;
}

EnsembleReport sample_report(const QuantumState& psi, const AlgebraElement& a, const ContextPtr& ctx,
                             const PreparedObservable& prep, std::size_t n, Rng& rng) {
  EnsembleReport r;
  r.observable = fingerprint(a);
  r.context = ctx->id;
  r.sample_count = n;
  r.exact_mean = quantum_average_exact(psi, a);
  r.spectrum = prep.points;
  r.histogram.assign(prep.points.size(), 0);
  const ContextPtr one[] = {ctx};
  for (std::size_t s = 0; s < n; ++s) {
    const ElementaryState phi = sample_elementary_state(psi, one, rng);
    const std::size_t k = *phi.layer_index(ctx->id);
    const double v = prep.value_at[k];
    r.sum += v;
    r.sum_squares += v * v;
    ++r.histogram[prep.bin_at[k]];
  }
  return r;
}

}  // namespace

EnsembleReport merge_reports(std::span<const EnsembleReport> parts) {
  if (parts.empty()) throw InvalidArgument("nothing to merge");
  EnsembleReport out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto& p = parts[i];
    if (p.observable != out.observable || p.context != out.context) {
      throw InvalidArgument("merging reports of different observables or contexts");
    }
    out.sample_count += p.sample_count;
    out.sum += p.sum;
    out.sum_squares += p.sum_squares;
    for (std::size_t b = 0; b < out.histogram.size(); ++b) out.histogram[b] += p.histogram[b];
  }
  finish(out);
  return out;
}

EnsembleReport ensemble_average(const QuantumState& psi, const AlgebraElement& a,
                                const ContextPtr& ctx, std::size_t n, Rng& rng) {
  if (n == 0) throw InvalidArgument("ensemble size must be at least 1");
  const auto prep = prepare(a, *ctx);
  EnsembleReport r = sample_report(psi, a, ctx, prep, n, rng);
  finish(r);
  return r;
}

EnsembleReport parallel_ensemble_average(const QuantumState& psi, const AlgebraElement& a,
                                         const ContextPtr& ctx, std::size_t n,
                                         std::uint64_t master_seed, std::size_t partitions) {
  if (n == 0) throw InvalidArgument("ensemble size must be at least 1");
  partitions = std::clamp<std::size_t>(partitions, 1, n);
  const auto prep = prepare(a, *ctx);
  std::vector<EnsembleReport> parts(partitions);
  std::vector<std::thread> workers;
  for (std::size_t p = 0; p < partitions; ++p) {
    const std::size_t share = n / partitions + (p < n % partitions ? 1 : 0);
    workers.emplace_back([&, p, share] {
      Rng rng = make_stream(master_seed, p);
      parts[p] = sample_report(psi, a, ctx, prep, share, rng);
    });
  }
  for (auto& w : workers) w.join();
  return merge_reports(parts);
}

double quantum_average_exact(const QuantumState& psi, const AlgebraElement& a) {
  if (!a.is_hermitian(1e-10)) throw NotHermitian("quantum average of a non-Hermitian element");
  if (psi.dimension() != a.dimension()) throw DimensionMismatch("state and observable dimensions differ");
  return (psi.projector() * a.matrix()).trace().real();
}

Complex expectation(const QuantumState& psi, const AlgebraElement& r) {
  if (psi.dimension() != r.dimension()) throw DimensionMismatch("state and element dimensions differ");
  return psi.vector().dot(r.matrix() * psi.vector());
}

double postulate6_linearity_check(const QuantumState& psi, const AlgebraElement& a,
                                  const AlgebraElement& b) {
  require_same_algebra(a, b, "postulate6_linearity_check");
  return std::abs(quantum_average_exact(psi, a + b) - quantum_average_exact(psi, a) -
                  quantum_average_exact(psi, b));
}

namespace {

std::vector<double> exact_cdf(const std::vector<double>& born, const PreparedObservable& prep) {
  std::vector<double> cdf(prep.points.size(), 0.0);
  for (std::size_t k = 0; k < born.size(); ++k) {
    for (std::size_t t = prep.bin_at[k]; t < cdf.size(); ++t) cdf[t] += born[k];
  }
  return cdf;
}

std::vector<double> empirical_cdf(const QuantumState& psi, const ContextPtr& ctx,
                                  const PreparedObservable& prep, std::size_t n, Rng& rng) {
  std::vector<double> counts(prep.points.size(), 0.0);
  const ContextPtr one[] = {ctx};
  for (std::size_t s = 0; s < n; ++s) {
    const ElementaryState phi = sample_elementary_state(psi, one, rng);
    counts[prep.bin_at[*phi.layer_index(ctx->id)]] += 1.0;
  }
  std::vector<double> cdf(counts.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    acc += counts[t];
    cdf[t] = acc / static_cast<double>(n);
  }
  return cdf;
}

}  // namespace

ConsistencyReport postulate5_consistency_check(const QuantumState& psi, const AlgebraElement& a,
                                               const ContextPtr& ctx1, const ContextPtr& ctx2,
                                               std::size_t n, Rng& rng) {
  if (n == 0) throw InvalidArgument("sample size must be at least 1");
  const auto prep1 = prepare(a, *ctx1);
  const auto prep2 = prepare(a, *ctx2);
  ConsistencyReport r;
  r.sample_count = n;
  r.thresholds = prep1.points;
  r.exact_cdf_1 = exact_cdf(born_distribution(psi, *ctx1), prep1);
  r.exact_cdf_2 = exact_cdf(born_distribution(psi, *ctx2), prep2);

  const std::uint64_t base = rng();
  Rng rng1 = make_stream(base, ctx1->id);
  Rng rng2 = make_stream(base, ctx2->id);
  r.empirical_cdf_1 = empirical_cdf(psi, ctx1, prep1, n, rng1);
  r.empirical_cdf_2 = empirical_cdf(psi, ctx2, prep2, n, rng2);

  const double nn = static_cast<double>(n);
  for (std::size_t t = 0; t < r.thresholds.size(); ++t) {
    r.max_exact_gap = std::max(r.max_exact_gap, std::abs(r.exact_cdf_1[t] - r.exact_cdf_2[t]));
    const double pooled = 0.5 * (r.empirical_cdf_1[t] + r.empirical_cdf_2[t]);
    const double se = std::sqrt(std::max(0.0, pooled * (1.0 - pooled)) * 2.0 / nn);
    r.pooled_standard_error.push_back(se);
    const double gap = std::abs(r.empirical_cdf_1[t] - r.empirical_cdf_2[t]);
    if (gap == 0.0) continue;
    if (se == 0.0) {
      r.statistical_agrees = false;
      r.max_standard_score = std::numeric_limits<double>::infinity();
      continue;
    }
    r.max_standard_score = std::max(r.max_standard_score, gap / se);
    if (gap > 4.0 * se) r.statistical_agrees = false;
  }
  r.exact_agrees = r.max_exact_gap <= 1e-12;
  return r;
}

}  // namespace qfound
