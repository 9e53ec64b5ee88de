#include "qfound/cli/commands.hpp"
#include "qfound/errors.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

using namespace qfound::cli;

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* cmd, Common& common, bool seeded) {
  if (seeded) {
    cmd->add_option("--seed", common.seed,
                    "Master seed (default: $QFOUND_SEED, else " + std::to_string(kDefaultSeed) + ")");
  }
  cmd->add_option("--out", common.out, "Report path (default: stdout)");
  cmd->add_option("--format", common.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
}

int emit(const CommandResult& result, const Common& common) {
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  if (!result.report.empty()) {
    if (common.out.empty()) {
      std::cout << result.report;
    } else {
      std::ofstream file(common.out, std::ios::binary);
      if (!file) {
        std::cerr << "error: cannot write " << common.out << '\n';
        return kExitUsage;
      }
      file << result.report;
    }
  }
  if (!result.summary.empty()) std::cerr << result.summary << '\n';
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments on contextual elementary states, GNS states and oscillator Green's functions"};
  app.require_subcommand(1);

  Common common;

  SpinDemoOptions spin;
  auto* spin_cmd = app.add_subcommand("spin-demo", "Born sampling for a spin-1/2 polarized along x");
  spin_cmd->add_option("--theta", spin.thetas, "Measurement angle(s) from x in the x-z plane (radians)");
  spin_cmd->add_option("-n,--samples", spin.samples, "Sample count per angle");
  add_common(spin_cmd, common, true);

  KsSearchOptions ks;
  auto* ks_cmd = app.add_subcommand("ks-search", "Search for a context-independent {0,1} assignment");
  ks_cmd->add_option("rays", ks.ray_file, "CSV ray file, x,y,z per line")->required();
  add_common(ks_cmd, common, false);

  GreenOptions gr;
  std::optional<std::size_t> cutoff;
  auto* green_cmd = app.add_subcommand("green", "Vacuum Green's function by Wick pairing and on the Fock truncation");
  green_cmd->add_option("-n,--order", gr.order, "Number of time arguments");
  green_cmd->add_option("--omega", gr.omega, "Oscillator frequency");
  green_cmd->add_option("--times", gr.times, "Time arguments (default: all zero)");
  green_cmd->add_option("--cutoff", cutoff, "Fock cutoff (default: order + 6)");
  add_common(green_cmd, common, false);

  GnsCheckOptions gns;
  auto* gns_cmd = app.add_subcommand("gns-check", "Vacuum-expectation and compression identities on random states");
  gns_cmd->add_option("-n,--dimension", gns.dimension, "Matrix size, 2..6");
  gns_cmd->add_option("--trials", gns.trials, "Number of random trials");
  add_common(gns_cmd, common, true);

  RunPlanOptions plan;
  auto* plan_cmd = app.add_subcommand("run-plan", "Run a spin-1 measurement plan");
  plan_cmd->add_option("plan", plan.plan_file, "JSON plan")->required();
  plan_cmd->add_option("--runs", plan.runs, "Independent runs");
  add_common(plan_cmd, common, true);

  FunctionalOptions fn;
  std::string source;
  auto* fn_cmd = app.add_subcommand("functional", "Green's function from derivatives of the generating functional");
  fn_cmd->add_option("--omega", fn.omega, "Oscillator frequency");
  fn_cmd->add_option("--times", fn.times, "Time arguments, on the grid");
  fn_cmd->add_option("--t-min", fn.t_min, "Grid start");
  fn_cmd->add_option("--t-max", fn.t_max, "Grid end");
  fn_cmd->add_option("--points", fn.points, "Grid points");
  fn_cmd->add_option("--step", fn.step, "Finite-difference step on source strengths");
  fn_cmd->add_option("--tolerance", fn.tolerance, "Allowed |derivative - Wick|");
  fn_cmd->add_option("--source", source, "CSV source t,j; reports Z of it");
  add_common(fn_cmd, common, false);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto format = parse_format(common.format).value_or(Format::json);
    const std::uint64_t seed = resolve_seed(common.seed, std::getenv(kSeedEnvironmentVariable));
    CommandResult result;
    if (spin_cmd->parsed()) {
      spin.seed = seed;
      spin.format = format;
      result = spin_demo(spin);
    } else if (ks_cmd->parsed()) {
      ks.format = format;
      result = ks_search(ks);
    } else if (green_cmd->parsed()) {
      gr.cutoff = cutoff;
      gr.format = green_cmd->count("--format") > 0 ? format : Format::csv;
      result = green(gr);
    } else if (gns_cmd->parsed()) {
      gns.seed = seed;
      gns.format = format;
      result = gns_check(gns);
    } else if (plan_cmd->parsed()) {
      plan.seed = seed;
      result = run_plan(plan);
    } else if (fn_cmd->parsed()) {
      if (!source.empty()) fn.source_file = source;
      fn.format = format;
      result = functional(fn);
    }
    return emit(result, common);
  } catch (const qfound::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
