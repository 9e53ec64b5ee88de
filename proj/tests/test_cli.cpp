#include "qfound/cli/commands.hpp"
#include "qfound/errors.hpp"
#include "qfound/serialize.hpp"

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <sys/wait.h>

using namespace qfound;
using namespace qfound::cli;

namespace {

const std::filesystem::path kData = QFOUND_DATA_DIR;

Json parse(const CommandResult& r) { return Json::parse(r.report); }

struct Process {
  int exit_code;
  std::string out;
};

Process run(const std::string& args) {
  const std::string cmd = std::string(QFOUND_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

}  // namespace

TEST_CASE("seed precedence: flag, then environment, then default") {
  CHECK(resolve_seed(7, "99") == 7);
  CHECK(resolve_seed(std::nullopt, "99") == 99);
  CHECK(resolve_seed(std::nullopt, nullptr) == kDefaultSeed);
  CHECK(resolve_seed(std::nullopt, "") == kDefaultSeed);
  CHECK(resolve_seed(std::nullopt, "18446744073709551615") == 18446744073709551615ULL);
  CHECK_THROWS_AS(resolve_seed(std::nullopt, "-3"), InvalidArgument);
  CHECK_THROWS_AS(resolve_seed(std::nullopt, "12abc"), InvalidArgument);
  CHECK_THROWS_AS(resolve_seed(std::nullopt, "99999999999999999999"), InvalidArgument);
}

TEST_CASE("format names") {
  CHECK(parse_format("json") == Format::json);
  CHECK(parse_format("csv") == Format::csv);
  CHECK_FALSE(parse_format("xml").has_value());
}

TEST_CASE("spin-demo examples") {
  SpinDemoOptions o;
  o.thetas = {0.0, std::numbers::pi, std::numbers::pi / 2};
  o.samples = 100000;
  const auto r = spin_demo(o);
  CHECK(r.exit_code == kExitOk);
  const auto j = parse(r);
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["results"][0]["empirical_plus"].get<double>() == 1.0);
  CHECK(j["results"][1]["empirical_plus"].get<double>() == 0.0);
  const double f = j["results"][2]["empirical_plus"].get<double>();
  CHECK(std::abs(f - 0.5) <= 3.0 * std::sqrt(0.25 / 100000));
  CHECK(r.warnings.empty());

  SpinDemoOptions wide;
  wide.thetas = {-1.0, 7.0};
  wide.samples = 100;
  CHECK(spin_demo(wide).warnings.size() == 2);

  SpinDemoOptions bad;
  bad.thetas = {std::nan("")};
  CHECK(spin_demo(bad).exit_code == kExitUsage);
  SpinDemoOptions none;
  none.samples = 0;
  CHECK(spin_demo(none).exit_code == kExitUsage);
}

TEST_CASE("reports are byte-identical for identical inputs") {
  SpinDemoOptions s;
  s.samples = 5000;
  s.seed = 4242;
  CHECK(spin_demo(s).report == spin_demo(s).report);
  s.format = Format::csv;
  CHECK(spin_demo(s).report == spin_demo(s).report);
  SpinDemoOptions other = s;
  other.seed = 4243;
  CHECK(spin_demo(other).report != spin_demo(s).report);

  GnsCheckOptions g;
  g.dimension = 4;
  g.trials = 20;
  CHECK(gns_check(g).report == gns_check(g).report);

  RunPlanOptions p;
  p.plan_file = kData / "plans" / "shared_axis.json";
  p.runs = 5;
  CHECK(run_plan(p).report == run_plan(p).report);

  // KS reports exclude wall time.
  KsSearchOptions k;
  k.ray_file = kData / "two_triads.csv";
  CHECK(ks_search(k).report == ks_search(k).report);
}

TEST_CASE("ks-search examples") {
  KsSearchOptions o;
  o.ray_file = kData / "single_triad.csv";
  const auto sat = ks_search(o);
  CHECK(sat.exit_code == kExitOk);
  CHECK(parse(sat)["result"] == "SAT");

  o.ray_file = kData / "peres33.csv";
  const auto unsat = ks_search(o);
  CHECK(unsat.exit_code == kExitOk);
  const auto j = parse(unsat);
  CHECK(j["result"] == "UNSAT");
  CHECK(j["rays"] == 33);
  CHECK(j["triads"] == 16);
  CHECK(j["assignment"].is_null());
  CHECK(unsat.summary.find("UNSAT") == 0);

  const auto empty = std::filesystem::temp_directory_path() / "qfound_empty_rays.csv";
  std::ofstream(empty) << "# nothing\n";
  o.ray_file = empty;
  CHECK(ks_search(o).exit_code == kExitUsage);
  o.ray_file = kData / "missing.csv";
  CHECK(ks_search(o).exit_code == kExitUsage);

  o.ray_file = kData / "single_triad.csv";
  o.format = Format::csv;
  CHECK(ks_search(o).report.rfind("rays,triads,orthogonal_pairs,result,nodes,assignment\n3,1,3,SAT,", 0) == 0);
}

TEST_CASE("green examples") {
  GreenOptions o;
  o.order = 2;
  const auto two = green(o);
  CHECK(two.exit_code == kExitOk);
  std::istringstream csv(two.report);
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header == "t1,t2,wick_re,wick_im,fock_re,fock_im,abs_diff");
  double vals[7];
  std::replace(row.begin(), row.end(), ',', ' ');
  std::istringstream fields(row);
  for (double& v : vals) fields >> v;
  CHECK(vals[2] == 0.5);
  CHECK(std::abs(vals[4] - 0.5) <= 1e-12);
  CHECK(vals[6] <= 1e-12);

  o.order = 3;
  o.format = Format::json;
  const auto odd = parse(green(o));
  CHECK(odd["wick"][0] == 0.0);
  CHECK(odd["matchings"] == 0);

  o.order = 4;
  const auto four = parse(green(o));
  CHECK(std::abs(four["wick"][0].get<double>() - 0.75) < 1e-15);
  CHECK(four["passed"] == true);

  o.order = 13;
  CHECK(green(o).exit_code == kExitUsage);
  o.order = 2;
  o.times = {1.0};
  CHECK(green(o).exit_code == kExitUsage);
  o.times = {};
  o.omega = -1.0;
  CHECK(green(o).exit_code == kExitUsage);
  o.omega = 1.0;
  o.cutoff = 2;
  CHECK(green(o).exit_code == kExitUsage);
}

TEST_CASE("gns-check examples") {
  GnsCheckOptions o;
  o.dimension = 2;
  o.trials = 100;
  const auto r = gns_check(o);
  CHECK(r.exit_code == kExitOk);
  const auto j = parse(r);
  CHECK(j["vacuum_expectation_residual"].get<double>() <= 1e-10);
  CHECK(j["compression_residual"].get<double>() <= 1e-10);
  CHECK(j["gns_rank_min"] == 2);
  CHECK(j["gns_rank_max"] == 2);

  o.trials = 0;
  const auto vacuous = gns_check(o);
  CHECK(vacuous.exit_code == kExitOk);
  CHECK(vacuous.warnings.size() == 1);

  o.trials = 100;
  o.dimension = 6;
  const auto start = std::chrono::steady_clock::now();
  CHECK(gns_check(o).exit_code == kExitOk);
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() < 10.0);

  o.dimension = 7;
  CHECK(gns_check(o).exit_code == kExitUsage);
  o.dimension = 1;
  CHECK(gns_check(o).exit_code == kExitUsage);
}

TEST_CASE("run-plan") {
  RunPlanOptions o;
  o.plan_file = kData / "plans" / "shared_axis.json";
  o.runs = 20;
  const auto r = run_plan(o);
  CHECK(r.exit_code == kExitOk);
  const auto j = parse(r);
  CHECK(j["reproducible"] == true);
  CHECK(j["stability_reset_on_attach"] == true);
  CHECK(j["runs"].size() == 20);
  for (const auto& run : j["runs"]) {
    const auto& t = run["transcript"];
    REQUIRE(t.size() == 6);
    // Steps 0-2 measure the shared S_x^2: one value across both instruments.
    CHECK(t[0]["value"] == t[1]["value"]);
    CHECK(t[1]["value"] == t[2]["value"]);
  }

  const auto bad = std::filesystem::temp_directory_path() / "qfound_bad_plan.json";
  std::ofstream(bad) << R"({"instruments": [], "steps": [{"instrument": "nope", "axis": 0}]})";
  o.plan_file = bad;
  CHECK(run_plan(o).exit_code == kExitUsage);
  o.plan_file = kData / "plans" / "missing.json";
  CHECK(run_plan(o).exit_code == kExitUsage);
}

TEST_CASE("functional") {
  FunctionalOptions o;
  o.times = {0.0, 0.0};
  const auto r = functional(o);
  CHECK(r.exit_code == kExitOk);
  const auto j = parse(r);
  CHECK(std::abs(j["functional_derivative"][0].get<double>() - 0.5) < 1e-3);

  const auto src = std::filesystem::temp_directory_path() / "qfound_source.csv";
  {
    std::ofstream out(src);
    out << "t,j\n";
    for (int k = 0; k <= 100; ++k) out << -0.5 + 0.01 * k << ',' << 0.0 << '\n';
  }
  o.source_file = src;
  const auto with_z = parse(functional(o));
  CHECK(with_z["generating_functional"][0] == 1.0);
  CHECK(with_z["generating_functional"][1] == 0.0);

  o.source_file.reset();
  o.times = {0.0015};
  CHECK(functional(o).exit_code == kExitUsage);
  o.times = {0.0, 0.0};
  o.tolerance = 1e-12;
  CHECK(functional(o).exit_code == kExitThresholdViolated);
}

TEST_CASE("executable end to end") {
  const auto peres = run("ks-search " + (kData / "peres33.csv").string());
  CHECK(peres.exit_code == 0);
  CHECK(Json::parse(peres.out)["result"] == "UNSAT");

  const auto a = run("spin-demo --seed 9 -n 2000");
  const auto b = run("spin-demo --seed 9 -n 2000");
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(Json::parse(a.out)["seed"] == 9);

  // Environment seed applies only without the flag.
  setenv(kSeedEnvironmentVariable, "31", 1);
  CHECK(Json::parse(run("spin-demo -n 10").out)["seed"] == 31);
  CHECK(Json::parse(run("spin-demo -n 10 --seed 5").out)["seed"] == 5);
  setenv(kSeedEnvironmentVariable, "oops", 1);
  CHECK(run("spin-demo -n 10").exit_code == 2);
  unsetenv(kSeedEnvironmentVariable);
  CHECK(Json::parse(run("spin-demo -n 10").out)["seed"] == kDefaultSeed);

  const auto out = std::filesystem::temp_directory_path() / "qfound_green.csv";
  std::filesystem::remove(out);
  CHECK(run("green -n 4 --out " + out.string()).exit_code == 0);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t1,t2,t3,t4,wick_re,wick_im,fock_re,fock_im,abs_diff");

  for (const char* cmd : {"spin-demo", "ks-search", "green", "gns-check", "run-plan", "functional"}) {
    CHECK(run(std::string(cmd) + " --help").exit_code == 0);
  }
  CHECK(run("functional --times 0 0 --step 1e-3").exit_code == 0);
  CHECK(run("green -n 13").exit_code == 2);
  CHECK(run("no-such-command").exit_code != 0);
  CHECK(run("gns-check -n 3 --trials 10 --format csv").out.rfind("dimension,trials", 0) == 0);
}
