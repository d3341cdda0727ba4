#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

// Drives the installed binary through popen; TRICUT_CLI_PATH is injected by
// the build so the test always exercises the freshly linked executable.

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr merged
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(TRICUT_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, got);
  const int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

fs::path scratch(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "tricut_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json load(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  return json::parse(f);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

int data_rows(const std::string& csv) {
  int lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  return lines - 1;  // header
}

}  // namespace

TEST_CASE("phase classifies and reports through JSON") {
  const fs::path dir = scratch("phase");
  const RunResult r = run_cli("phase --a 2 --t 0.5 --out " + dir.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("ThreeCut") != std::string::npos);
  const json j = load(dir / "phase.json");
  CHECK(j["phase"] == "ThreeCut");
  CHECK(j["delta_c"].get<double>() > 0);
  CHECK(j["config"]["a"].get<double>() == 2.0);

  const RunResult weak = run_cli("phase --a 1 --t 0.5 --out " + dir.string());
  CHECK(weak.exit_code == 0);
  CHECK(weak.output.find("Unsupported") != std::string::npos);
}

TEST_CASE("unusable configurations exit with code 2") {
  const fs::path dir = scratch("bad");
  CHECK(run_cli("phase --a -1 --out " + dir.string()).exit_code == 2);
  CHECK(run_cli("density --t 1.5 --out " + dir.string()).exit_code == 2);
  CHECK(run_cli("density --a 1.5 --out " + dir.string()).exit_code == 2);  // two-cut
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("").exit_code == 2);  // no subcommand prints help
}

TEST_CASE("density emits the interval masses") {
  const fs::path dir = scratch("density");
  const RunResult r = run_cli("density --a 2 --t 0.4 --out " + dir.string());
  CHECK(r.exit_code == 0);
  const json j = load(dir / "density.json");
  const auto m = j["masses"].get<std::vector<double>>();
  REQUIRE(m.size() == 3);
  CHECK(std::abs(m[0] - 0.3) <= 1e-8);
  CHECK(std::abs(m[1] - 0.4) <= 1e-8);
  CHECK(std::abs(m[2] - 0.3) <= 1e-8);
  const std::string csv = slurp(dir / "density.csv");
  CHECK(csv.rfind("x,rho\n", 0) == 0);
  CHECK(data_rows(csv) >= 100);
}

TEST_CASE("a custom grid narrows the density table") {
  const fs::path dir = scratch("density_grid");
  const RunResult r = run_cli("density --grid=-1,0,1,5 --out " + dir.string());
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(dir / "density.csv");
  CHECK(data_rows(csv) == 4);
  CHECK(csv.find("\n5,0\n") != std::string::npos);  // rho vanishes off support
}

TEST_CASE("sample draws are deterministic and the histogram balances") {
  const fs::path dir = scratch("sample");
  const std::string args =
      "sample --n 40 --draws 3 --seed 7 --bins 0.2 --no-timestamp --out " + dir.string();
  CHECK(run_cli(args).exit_code == 0);
  CHECK(data_rows(slurp(dir / "eigenvalues.csv")) == 3 * 40);

  const json j = load(dir / "histogram.json");
  double emp = 0, pred = 0;
  for (double v : j["empirical"].get<std::vector<double>>()) emp += v;
  for (double v : j["predicted"].get<std::vector<double>>()) pred += v;
  CHECK(std::abs(emp - 1.0) <= 1e-9);
  CHECK(std::abs(pred - 1.0) <= 1e-6);
  CHECK(j["edge_statistics"].size() == 3);

  // reruns into the same directory reproduce every byte
  const std::string csv_before = slurp(dir / "eigenvalues.csv");
  const std::string hist_before = slurp(dir / "histogram.json");
  CHECK(run_cli(args).exit_code == 0);
  CHECK(slurp(dir / "eigenvalues.csv") == csv_before);
  CHECK(slurp(dir / "histogram.json") == hist_before);
}

TEST_CASE("the kernel diagonal tracks the density") {
  const fs::path dir = scratch("kernel");
  const RunResult r = run_cli("kernel --n 6 --out " + dir.string());
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(dir / "kernel.csv");
  CHECK(csv.rfind("x,kn,scaled,rho\n", 0) == 0);
  CHECK(data_rows(csv) == 22);
  const json j = load(dir / "kernel.json");
  CHECK(j["max_diag_deviation"].get<double>() < 0.05);
}

TEST_CASE("a narrow profile at large n surfaces the precision failure") {
  const fs::path dir = scratch("kernel_narrow");
  const RunResult r = run_cli("kernel --n 12 --precision double --out " + dir.string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("accurate") != std::string::npos);
}

TEST_CASE("limit ladders contract through n = 24") {
  const fs::path dir = scratch("limits");
  const RunResult r = run_cli("limits --n 24 --out " + dir.string());
  CHECK(r.exit_code == 0);
  const json j = load(dir / "limits.json");
  CHECK(j["all_nonincreasing"].get<bool>());
  REQUIRE(j["reports"].size() == 5);
  for (const json& rep : j["reports"]) {
    const auto errs = rep["max_err"].get<std::vector<double>>();
    REQUIRE(errs.size() == 2);
    CHECK(rep["nonincreasing"].get<bool>());
  }
  CHECK(run_cli("limits --n 6 --out " + dir.string()).exit_code == 2);
}

TEST_CASE("verify passes its battery at n = 6") {
  const fs::path dir = scratch("verify");
  const RunResult r = run_cli("verify --a 2 --t 0.5 --n 6 --out " + dir.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("all checks passed") != std::string::npos);
  const json j = load(dir / "verify.json");
  CHECK(j["passed"].get<bool>());
  CHECK(j["checks"].size() == 13);
  for (const json& c : j["checks"]) CHECK(c["pass"].get<bool>());
}

TEST_CASE("command line flags override the configuration file") {
  const fs::path dir = scratch("config");
  const fs::path ini = dir / "run.ini";
  std::ofstream(ini) << "a=2.5\nt=0.4\n";
  const RunResult r =
      run_cli("phase --config " + ini.string() + " --a 3 --out " + dir.string());
  CHECK(r.exit_code == 0);
  const json j = load(dir / "phase.json");
  CHECK(j["config"]["a"].get<double>() == 3.0);
  CHECK(j["config"]["t"].get<double>() == 0.4);
}
