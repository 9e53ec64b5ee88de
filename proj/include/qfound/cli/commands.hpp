#pragma once

// Experiment commands behind the qfound executable. Each command returns its
// report text instead of writing it, so reports can be compared byte for byte.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qfound::cli {

enum class Format { json, csv };

inline constexpr int kExitOk = 0;
inline constexpr int kExitThresholdViolated = 1;
inline constexpr int kExitUsage = 2;

inline constexpr std::uint64_t kDefaultSeed = 12345;
inline constexpr const char* kSeedEnvironmentVariable = "QFOUND_SEED";

struct CommandResult {
  int exit_code = kExitOk;
  std::string report;                 // deterministic given command, seed and parameters
  std::vector<std::string> warnings;
  std::string summary;                // human-readable; may hold timings
};

/// Seed from the flag, else the environment value, else kDefaultSeed.
/// Throws InvalidArgument if the environment value is not an unsigned integer.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const char* environment_value);

std::optional<Format> parse_format(const std::string& name);

struct SpinDemoOptions {
  std::vector<double> thetas;
  std::size_t samples = 100000;
  std::uint64_t seed = kDefaultSeed;
  Format format = Format::json;
};

/// Spin-1/2 polarized along x, measured along directions at angle theta from
/// x in the x-z plane: empirical vs exact frequency of +1/2.
CommandResult spin_demo(const SpinDemoOptions& options);

struct KsSearchOptions {
  std::filesystem::path ray_file;
  Format format = Format::json;
};

/// Exit code 0 whether SAT or UNSAT; malformed input exits with kExitUsage.
CommandResult ks_search(const KsSearchOptions& options);

struct GreenOptions {
  std::size_t order = 2;
  double omega = 1.0;
  std::vector<double> times;  // empty: all times zero
  std::optional<std::size_t> cutoff;
  Format format = Format::csv;
};

/// Wick and Fock routes side by side; fails when they differ by more than 1e-8.
CommandResult green(const GreenOptions& options);

struct GnsCheckOptions {
  std::size_t dimension = 2;
  std::size_t trials = 100;
  std::uint64_t seed = kDefaultSeed;
  Format format = Format::json;
};

/// Max vacuum-expectation and compression residuals over random trials;
/// fails above 1e-10.
CommandResult gns_check(const GnsCheckOptions& options);

struct RunPlanOptions {
  std::filesystem::path plan_file;
  std::size_t runs = 1;
  std::uint64_t seed = kDefaultSeed;
};

/// Runs a spin-1 measurement plan (JSON) and reports the transcripts. Fails if
/// an observable measured twice in a row by the same instrument changes value.
CommandResult run_plan(const RunPlanOptions& options);

struct FunctionalOptions {
  double omega = 1.0;
  std::vector<double> times;
  double t_min = -5.0;
  double t_max = 5.0;
  std::size_t points = 1001;
  double step = 1e-3;             // finite-difference step on source strengths
  double tolerance = 1e-4;
  std::optional<std::filesystem::path> source_file;
  Format format = Format::json;
};

/// Green's function from derivatives of Z(j) compared with Wick pairing; with
/// a source file, also reports Z of that source.
CommandResult functional(const FunctionalOptions& options);

}  // namespace qfound::cli
