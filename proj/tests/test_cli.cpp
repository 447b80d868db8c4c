#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int status = -1;
  std::string err;
};

CliResult run_cli(const std::string& args, const fs::path& scratch) {
  fs::create_directories(scratch);
  const fs::path err = scratch / "stderr.txt";
  const std::string cmd = std::string(AFEM_CLI_PATH) + " " + args + " >" + (scratch / "stdout.txt").string() +
                          " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  CliResult r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("afem_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("cli run writes the convergence table and manifest") {
  const fs::path dir = scratch_dir("run");
  const CliResult r = run_cli("--problem sin2 --max-dofs 1500 --dump-mesh --save-solution --out " + (dir / "out").string(), dir);
  REQUIRE(r.status == 0);
  const std::string csv = slurp(dir / "out" / "convergence.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "iter,n_cells,n_dofs,energy_error,triple_error,eta,osc,bnorm32,bnorm12,marked,rho,effectivity");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows >= 5);
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(fs::exists(dir / "out" / "mesh_000.txt"));
  CHECK(fs::exists(dir / "out" / "solution.txt"));
  CHECK(slurp(dir / "out" / "manifest.json").find("\"final_dofs\"") != std::string::npos);

  const CliResult again =
      run_cli("--problem sin2 --max-dofs 1500 --load-solution " + (dir / "out" / "solution.txt").string() +
                  " --out " + (dir / "out2").string(),
              dir);
  CHECK(again.status == 0);
}

TEST_CASE("cli help and errors") {
  const fs::path dir = scratch_dir("errors");
  CHECK(run_cli("--help", dir).status == 0);
  const CliResult bad = run_cli("--theta 1.5 --out " + (dir / "x").string(), dir);
  CHECK(bad.status == 2);
  CHECK(bad.err.find("theta") != std::string::npos);
  CHECK(run_cli("--degree banana", dir).status == 2);
  CHECK(run_cli("--problem nowhere.json --out " + (dir / "y").string(), dir).status == 2);
  const CliResult gamma = run_cli("--mode nitsche --gamma1 1e-6 --gamma2 1e-6 --out " + (dir / "z").string(), dir);
  CHECK(gamma.status == 3);
  CHECK(gamma.err.find("gamma") != std::string::npos);
}

TEST_CASE("cli runs are reproducible") {
  const fs::path dir = scratch_dir("repro");
  const std::string common = "--problem sin2 --mode nitsche --max-dofs 1200 --track-inconsistency --out ";
  REQUIRE(run_cli(common + (dir / "a").string(), dir).status == 0);
  REQUIRE(run_cli(common + (dir / "b").string(), dir).status == 0);
  const std::string a = slurp(dir / "a" / "convergence.csv");
  CHECK(!a.empty());
  CHECK(a == slurp(dir / "b" / "convergence.csv"));
}

TEST_CASE("cli custom problem") {
  const fs::path dir = scratch_dir("custom");
  fs::create_directories(dir);
  std::ofstream(dir / "p.json") << R"({"name": "load", "f": [[1.0, 0, 0]]})";
  CHECK(run_cli("--problem " + (dir / "p.json").string() + " --max-dofs 800 --out " + (dir / "o").string(), dir)
            .status == 0);
  const std::string csv = slurp(dir / "o" / "convergence.csv");
  CHECK(csv.find("\n0,16,") != std::string::npos);
}
