#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end checks of the cpa binary: output rows, determinism, exit codes.

namespace {

const std::string kCli = CPA_CLI_PATH;
const std::filesystem::path kDataDir = CPA_DATA_DIR;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run(const std::string& args) {
  auto dir = std::filesystem::temp_directory_path();
  auto out_path = dir / "cpa_cli_test.out";
  auto err_path = dir / "cpa_cli_test.err";
  std::string cmd = kCli + " " + args + " > " + out_path.string() + " 2> " + err_path.string();
  int rc = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = (rc != -1 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

}  // namespace

TEST_CASE("design command prints the optimum as key,value rows", "[cli]") {
  auto r = run("design --geometry cp --fill 0.5");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("D_opt_nm,30.1") != std::string::npos);
  CHECK(r.out.find("A_tr_at_opt,0.50") != std::string::npos);
}

TEST_CASE("pnr command emits the fock anchor row", "[cli]") {
  auto r = run("pnr --source fock:2 --n 10 --eta 1.0");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("\n2,0.9\n") != std::string::npos);
}

TEST_CASE("pnr-curve sweeps the detector count", "[cli]") {
  auto r = run("pnr-curve --m 2 --eta 1.0 --n-max 10");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("\n2,0.5\n") != std::string::npos);  // N = 2: 2 of 4 assignments
  auto last = r.out.find("\n10,");
  REQUIRE(last != std::string::npos);
  CHECK_THAT(std::stod(r.out.substr(last + 4)), Catch::Matchers::WithinAbs(0.9, 1e-12));
}

TEST_CASE("montecarlo output is deterministic for a fixed seed", "[cli]") {
  std::string args = "montecarlo --stack " + (kDataDir / "fig5b_5layer.json").string() +
                     " --samples 40 --bound 0.05 --seed 42";
  auto a = run(args + " --threads 1");
  auto b = run(args + " --threads 4");
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);

  auto other_seed = run("montecarlo --stack " + (kDataDir / "fig5b_5layer.json").string() +
                        " --samples 40 --bound 0.05 --seed 43");
  REQUIRE(other_seed.exit_code == 0);
  CHECK(a.out != other_seed.out);
}

TEST_CASE("usage and computation errors use distinct exit codes", "[cli]") {
  CHECK(run("frobnicate").exit_code == 2);
  CHECK(run("design --geometry cp").exit_code == 2);  // ValidationError: missing --fill
  CHECK(run("sweep").exit_code == 2);                 // missing required --stack

  auto missing = run("uniformity --stack /nonexistent/stack.json");
  CHECK(missing.exit_code == 1);
  CHECK(missing.err.find("error: io:") != std::string::npos);

  // coherent illumination of a one-port (mirror) stack is a geometry error
  auto one_port = run("spectrum --stack " + (kDataDir / "fig2_salisbury.json").string() +
                      " --from 1500 --to 1600 --points 3 --mode coherent");
  CHECK(one_port.exit_code == 1);
  CHECK(one_port.err.find("unsupported-geometry") != std::string::npos);

  auto help = run("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("sweep") != std::string::npos);
}
