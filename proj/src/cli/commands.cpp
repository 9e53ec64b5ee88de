#include "qfound/cli/commands.hpp"

#include "qfound/context.hpp"
#include "qfound/elementary_state.hpp"
#include "qfound/ensemble.hpp"
#include "qfound/errors.hpp"
#include "qfound/gns.hpp"
#include "qfound/ks_search.hpp"
#include "qfound/measurement.hpp"
#include "qfound/oscillator.hpp"
#include "qfound/random.hpp"
#include "qfound/serialize.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

namespace qfound::cli {

namespace {

constexpr double kGreenRouteTolerance = 1e-8;
constexpr double kGnsTolerance = 1e-10;

Json header(const std::string& command) {
  return Json{{"schema_version", kSchemaVersion}, {"command", command}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

CommandResult usage_error(const std::string& message) {
  CommandResult r;
  r.exit_code = kExitUsage;
  r.summary = "error: " + message;
  return r;
}

std::string fixed(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

}  // namespace

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const char* environment_value) {
  if (flag) return *flag;
  if (environment_value != nullptr && *environment_value != '\0') {
    const std::string text(environment_value);
    if (text.find_first_not_of("0123456789") != std::string::npos || text.size() > 20) {
      throw InvalidArgument(std::string(kSeedEnvironmentVariable) + " must be an unsigned integer, got '" +
                            text + "'");
    }
    try {
      return std::stoull(text);
    } catch (const std::out_of_range&) {
      throw InvalidArgument(std::string(kSeedEnvironmentVariable) + " is out of range");
    }
  }
  return kDefaultSeed;
}

std::optional<Format> parse_format(const std::string& name) {
  if (name == "json") return Format::json;
  if (name == "csv") return Format::csv;
  return std::nullopt;
}

CommandResult spin_demo(const SpinDemoOptions& options) {
  if (options.samples == 0) return usage_error("spin-demo needs at least one sample");
  std::vector<double> thetas = options.thetas;
  if (thetas.empty()) thetas = {0.0, std::numbers::pi / 3.0};
  CommandResult out;
  for (double t : thetas) {
    if (!std::isfinite(t)) return usage_error("angle must be finite");
    if (t < 0.0 || t > 2.0 * std::numbers::pi) {
      out.warnings.push_back("angle " + fixed(t) + " lies outside [0, 2pi]");
    }
  }

  const auto alg = make_full_algebra(2);
  Matrix sx(2, 2), sz(2, 2);
  sx << 0.0, 0.5, 0.5, 0.0;
  sz << 0.5, 0.0, 0.0, -0.5;
  ContextRegistry registry;
  const auto x_context = context_from_observable(AlgebraElement(alg, sx), registry);
  const QuantumState psi(Vector::Ones(2), x_context);

  Json results = Json::array();
  std::ostringstream csv;
  csv << std::setprecision(17) << "theta,n,plus_count,empirical_plus,exact_plus,standard_error,within_4se\n";
  bool all_pass = true;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double t = thetas[i];
    const AlgebraElement s(alg, std::cos(t) * sx + std::sin(t) * sz);
    const auto ctx = context_from_observable(s, registry);
    // Indicator of the +1/2 outcome.
    std::vector<double> plus(ctx->dimension());
    for (std::size_t k = 0; k < plus.size(); ++k) plus[k] = evaluate_at(*ctx, k, s) > 0.0 ? 1.0 : 0.0;
    const AlgebraElement indicator = ctx->diagonal_element(plus);
    Rng rng = make_stream(options.seed, i);
    const auto rep = ensemble_average(psi, indicator, ctx, options.samples, rng);
    const bool pass = rep.within(4.0);
    all_pass = all_pass && pass;
    const std::size_t plus_count = rep.histogram.back();
    // Counted frequency, exact at the extreme angles.
    const double empirical_plus = static_cast<double>(plus_count) / static_cast<double>(rep.sample_count);
    results.push_back({{"theta", t},
                       {"n", rep.sample_count},
                       {"plus_count", plus_count},
                       {"empirical_plus", empirical_plus},
                       {"exact_plus", rep.exact_mean},
                       {"standard_error", rep.standard_error},
                       {"within_4se", pass}});
    csv << t << ',' << rep.sample_count << ',' << plus_count << ',' << empirical_plus << ','
        << rep.exact_mean << ',' << rep.standard_error << ',' << (pass ? "true" : "false") << '\n';
  }
  Json report = header("spin-demo");
  report["seed"] = options.seed;
  report["state"] = "spin-1/2 polarized along +x";
  report["results"] = results;
  report["warnings"] = out.warnings;
  report["passed"] = all_pass;
  out.report = options.format == Format::json ? dump(report) : csv.str();
  out.exit_code = all_pass ? kExitOk : kExitThresholdViolated;
  out.summary = all_pass ? "spin-demo: all angles within 4 standard errors"
                         : "spin-demo: empirical frequency outside 4 standard errors";
  return out;
}

CommandResult ks_search(const KsSearchOptions& options) {
  std::vector<Ray> rays;
  KsSearchResult res;
  std::string checksum;
  const auto start = std::chrono::steady_clock::now();
  try {
    rays = load_rays_csv(options.ray_file);
    checksum = file_checksum(options.ray_file);
    res = ks_noncontextual_search(rays);
  } catch (const Error& e) {
    return usage_error(e.what());
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string verdict = res.assignment ? "SAT" : "UNSAT";

  CommandResult out;
  if (options.format == Format::json) {
    Json report = header("ks-search");
    report["ray_file_checksum"] = checksum;
    report["rays"] = res.ray_count;
    report["triads"] = res.triad_count;
    report["orthogonal_pairs"] = res.pair_count;
    report["result"] = verdict;
    report["nodes"] = res.nodes;
    report["assignment"] = res.assignment ? Json(*res.assignment) : Json(nullptr);
    out.report = dump(report);
  } else {
    std::ostringstream csv;
    csv << "rays,triads,orthogonal_pairs,result,nodes,assignment\n";
    csv << res.ray_count << ',' << res.triad_count << ',' << res.pair_count << ',' << verdict << ','
        << res.nodes << ',';
    if (res.assignment) {
      for (int v : *res.assignment) csv << v;
    }
    csv << '\n';
    out.report = csv.str();
  }
  std::ostringstream summary;
  summary << verdict << " after " << res.nodes << " nodes in " << std::fixed << std::setprecision(3)
          << seconds << " s (" << res.ray_count << " rays, " << res.triad_count << " triads)";
  out.summary = summary.str();
  return out;
}

CommandResult green(const GreenOptions& options) {
  if (options.order > kMaxGreenOrder) {
    return usage_error("order " + std::to_string(options.order) + " exceeds 12");
  }
  if (!(options.omega > 0.0)) return usage_error("omega must be positive");
  std::vector<double> times = options.times;
  if (times.empty()) times.assign(options.order, 0.0);
  if (times.size() != options.order) {
    return usage_error("expected " + std::to_string(options.order) + " times, got " +
                       std::to_string(times.size()));
  }
  const std::size_t cutoff = options.cutoff.value_or(times.size() + 6);
  Complex w, f;
  try {
    w = wick_green(times, options.omega);
    f = fock_oracle_green(times, options.omega, cutoff);
  } catch (const Error& e) {
    return usage_error(e.what());
  }
  const double diff = std::abs(w - f);
  CommandResult out;
  const bool pass = diff <= kGreenRouteTolerance;
  if (options.format == Format::csv) {
    std::ostringstream csv;
    csv << std::setprecision(17);
    for (std::size_t k = 0; k < times.size(); ++k) csv << 't' << (k + 1) << ',';
    csv << "wick_re,wick_im,fock_re,fock_im,abs_diff\n";
    for (double t : times) csv << t << ',';
    csv << w.real() << ',' << w.imag() << ',' << f.real() << ',' << f.imag() << ',' << diff << '\n';
    out.report = csv.str();
  } else {
    Json report = header("green");
    report["order"] = options.order;
    report["omega"] = options.omega;
    report["cutoff"] = cutoff;
    report["times"] = times;
    report["matchings"] = matching_count(times.size());
    report["wick"] = complex_to_json(w);
    report["fock"] = complex_to_json(f);
    report["abs_diff"] = diff;
    report["passed"] = pass;
    out.report = dump(report);
  }
  out.exit_code = pass ? kExitOk : kExitThresholdViolated;
  out.summary = "green: |wick - fock| = " + fixed(diff);
  return out;
}

CommandResult gns_check(const GnsCheckOptions& options) {
  if (options.dimension < 2 || options.dimension > 6) {
    return usage_error("gns-check dimension must lie in [2, 6]");
  }
  CommandResult out;
  if (options.trials == 0) out.warnings.push_back("no trials requested; the check passes vacuously");
  const auto alg = make_full_algebra(options.dimension);
  double vacuum_residual = 0.0;
  double compression_residual = 0.0;
  double invariance_residual = 0.0;
  std::size_t min_rank = options.dimension * options.dimension;
  std::size_t max_rank = 0;
  for (std::size_t t = 0; t < options.trials; ++t) {
    Rng rng = make_stream(options.seed, t);
    const QuantumState psi = random_state(options.dimension, rng);
    const auto f = StateFunctional::vector_state(alg, psi);
    const GnsSpace space = build_gns(f, alg);
    min_rank = std::min(min_rank, space.rank());
    max_rank = std::max(max_rank, space.rank());
    const AlgebraElement s = random_element(alg, rng);
    vacuum_residual = std::max(vacuum_residual, std::abs(vacuum_expectation(space, s) - f(s)));
    const AlgebraElement a = random_hermitian(alg, rng);
    const AlgebraElement probes[] = {s};
    const auto c = compression_identity_check(psi, a, probes);
    compression_residual = std::max(compression_residual, c.residual);
    invariance_residual = std::max(invariance_residual, c.invariance_residual);
  }
  const bool pass = vacuum_residual <= kGnsTolerance && compression_residual <= kGnsTolerance &&
                    invariance_residual <= kGnsTolerance;
  if (options.trials == 0) min_rank = 0;
  if (options.format == Format::json) {
    Json report = header("gns-check");
    report["seed"] = options.seed;
    report["dimension"] = options.dimension;
    report["trials"] = options.trials;
    report["gns_rank_min"] = min_rank;
    report["gns_rank_max"] = max_rank;
    report["vacuum_expectation_residual"] = vacuum_residual;
    report["compression_residual"] = compression_residual;
    report["compression_invariance_residual"] = invariance_residual;
    report["tolerance"] = kGnsTolerance;
    report["warnings"] = out.warnings;
    report["passed"] = pass;
    out.report = dump(report);
  } else {
    std::ostringstream csv;
    csv << std::setprecision(17)
        << "dimension,trials,gns_rank_min,gns_rank_max,vacuum_expectation_residual,compression_residual,"
           "compression_invariance_residual,passed\n"
        << options.dimension << ',' << options.trials << ',' << min_rank << ',' << max_rank << ','
        << vacuum_residual << ',' << compression_residual << ',' << invariance_residual << ','
        << (pass ? "true" : "false") << '\n';
    out.report = csv.str();
  }
  out.exit_code = pass ? kExitOk : kExitThresholdViolated;
  out.summary = "gns-check: max residual " + fixed(std::max({vacuum_residual, compression_residual,
                                                              invariance_residual}));
  return out;
}

namespace {

struct ParsedPlan {
  std::optional<Vector> state;
  std::map<std::string, Instrument> instruments;
  std::map<std::string, std::array<AlgebraElement, 3>> families;
  std::vector<PlanStep> steps;
};

ParsedPlan parse_plan(const Json& j, ContextRegistry& registry) {
  ParsedPlan plan;
  if (j.contains("state")) {
    const auto& s = j.at("state");
    if (!s.is_array() || s.size() != 3) throw InvalidArgument("plan state must have 3 components");
    Vector v(3);
    for (std::size_t k = 0; k < 3; ++k) v(static_cast<Eigen::Index>(k)) = complex_from_json(s[k]);
    plan.state = v;
  }
  for (const auto& inst : j.at("instruments")) {
    const auto label = inst.at("label").get<std::string>();
    std::array<Eigen::Vector3d, 3> frame;
    const auto& rows = inst.at("frame");
    if (!rows.is_array() || rows.size() != 3) throw InvalidArgument("frame of '" + label + "' needs 3 axes");
    for (std::size_t a = 0; a < 3; ++a) {
      const auto axis = rows[a].get<std::vector<double>>();
      if (axis.size() != 3) throw InvalidArgument("frame axes need 3 components");
      frame[a] = Eigen::Vector3d(axis[0], axis[1], axis[2]);
    }
    auto family = rotated_squared_family(frame);
    auto ctx = context_from_family(family, registry);
    plan.instruments.insert_or_assign(label, Instrument{ctx, label});
    plan.families.insert_or_assign(label, family);
  }
  for (const auto& step : j.at("steps")) {
    const auto label = step.at("instrument").get<std::string>();
    auto it = plan.instruments.find(label);
    if (it == plan.instruments.end()) throw InvalidArgument("unknown instrument '" + label + "'");
    AlgebraElement observable = [&] {
      if (step.contains("axis")) {
        const auto axis = step.at("axis").get<std::size_t>();
        if (axis > 2) throw InvalidArgument("axis must be 0, 1 or 2");
        return plan.families.at(label)[axis];
      }
      return element_from_json(step.at("observable"));
    }();
    plan.steps.push_back(PlanStep{it->second, observable});
  }
  return plan;
}

}  // namespace

CommandResult run_plan(const RunPlanOptions& options) {
  if (options.runs == 0) return usage_error("run-plan needs at least one run");
  ContextRegistry registry;
  ParsedPlan plan;
  try {
    std::ifstream in(options.plan_file);
    if (!in) return usage_error("cannot open plan " + options.plan_file.string());
    plan = parse_plan(Json::parse(in), registry);
  } catch (const std::exception& e) {
    return usage_error(std::string("malformed plan: ") + e.what());
  }
  if (plan.steps.empty()) return usage_error("plan has no steps");

  Json runs = Json::array();
  bool reproducible = true;
  for (std::size_t r = 0; r < options.runs; ++r) {
    Rng rng = make_stream(options.seed, r);
    ElementaryState phi0(r);
    if (plan.state) phi0.attach(QuantumState(*plan.state));
    std::vector<MeasurementRecord> transcript;
    try {
      transcript = run_sequence(phi0, plan.steps, rng);
    } catch (const Error& e) {
      return usage_error(e.what());
    }
    for (std::size_t k = 1; k < transcript.size(); ++k) {
      const auto& a = transcript[k - 1];
      const auto& b = transcript[k];
      if (a.instrument == b.instrument && a.observable == b.observable && a.value != b.value) {
        reproducible = false;
      }
    }
    runs.push_back({{"run", r}, {"transcript", transcript_to_json(transcript)}});
  }
  Json report = header("run-plan");
  report["seed"] = options.seed;
  Json contexts = Json::object();
  for (const auto& [label, inst] : plan.instruments) contexts[label] = inst.context->id;
  report["instruments"] = contexts;
  report["quantum_state_attached"] = plan.state.has_value();
  // Attaching a quantum state clears stability gained before attachment.
  report["stability_reset_on_attach"] = plan.state.has_value();
  report["runs"] = runs;
  report["reproducible"] = reproducible;
  CommandResult out;
  out.report = dump(report);
  out.exit_code = reproducible ? kExitOk : kExitThresholdViolated;
  out.summary = "run-plan: " + std::to_string(options.runs) + " run(s), " +
                (reproducible ? "repeated measurements reproducible" : "repeated measurement changed value");
  return out;
}

CommandResult functional(const FunctionalOptions& options) {
  const TimeGrid grid{options.t_min, options.t_max, options.points};
  Complex fd, wick;
  std::optional<Complex> z;
  try {
    grid.validate();
    fd = functional_derivative_green(grid, options.times, options.omega, options.step);
    wick = wick_green(options.times, options.omega);
    if (options.source_file) {
      std::ifstream in(*options.source_file);
      if (!in) return usage_error("cannot open source " + options.source_file->string());
      z = generating_functional(read_source_csv(in), options.omega);
    }
  } catch (const Error& e) {
    return usage_error(e.what());
  }
  const double diff = std::abs(fd - wick);
  const bool pass = diff <= options.tolerance;
  CommandResult out;
  if (options.format == Format::json) {
    Json report = header("functional");
    report["omega"] = options.omega;
    report["grid"] = {{"t_min", grid.t_min}, {"t_max", grid.t_max}, {"points", grid.points}};
    report["times"] = options.times;
    report["finite_difference_step"] = options.step;
    report["functional_derivative"] = complex_to_json(fd);
    report["wick"] = complex_to_json(wick);
    report["abs_diff"] = diff;
    report["tolerance"] = options.tolerance;
    if (z) report["generating_functional"] = complex_to_json(*z);
    report["passed"] = pass;
    out.report = dump(report);
  } else {
    std::ostringstream csv;
    csv << std::setprecision(17) << "fd_re,fd_im,wick_re,wick_im,abs_diff";
    if (z) csv << ",z_re,z_im";
    csv << '\n' << fd.real() << ',' << fd.imag() << ',' << wick.real() << ',' << wick.imag() << ',' << diff;
    if (z) csv << ',' << z->real() << ',' << z->imag();
    csv << '\n';
    out.report = csv.str();
  }
  out.exit_code = pass ? kExitOk : kExitThresholdViolated;
  out.summary = "functional: |fd - wick| = " + fixed(diff);
  return out;
}

}  // namespace qfound::cli
