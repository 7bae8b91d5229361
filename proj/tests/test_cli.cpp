#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <string>

#include "support/helpers.hpp"

namespace {

int run_cli(const std::string& args) {
  std::string cmd = std::string(DRACERT_BIN) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cli: usage and IO errors exit with code 4") {
  CHECK(run_cli("synthesize /no/such/model.txt") == 4);
  CHECK(run_cli("synthesize --builtin nosuch") == 4);
  CHECK(run_cli("verify --builtin running --policy /no/such.policy") == 4);
  CHECK(run_cli("bogus-subcommand") == 4);
}

TEST_CASE("cli: a solver timeout exits with code 3") {
  std::string stub = std::string(DRA_SOURCE_DIR) + "/tests/support/sleep_solver.sh";
  CHECK(run_cli("verify --builtin pagerank --solver " + stub + " --timeout 1") == 3);
}

TEST_CASE("cli: unsat through the template sweep exits with code 2", "[solver]") {
  // identity chain never moves mass, so the target is unreachable
  std::string model = std::string(DRA_SOURCE_DIR) + "/models/unreachable.model";
  CHECK(run_cli("synthesize " + model + " --ninv-max 2 --solver " +
                testutil::solver_path()) == 2);
}

TEST_CASE("cli: simulate exits 0 on reach", "[solver]") {
  CHECK(run_cli("simulate --builtin grid8x8") == 0);
}

TEST_CASE("cli: synthesized artifacts verify and re-check on disk", "[solver]") {
  std::string out = "/tmp/dra-cli-roundtrip";
  std::string common = " --builtin running --solver " + testutil::solver_path();
  REQUIRE(run_cli("synthesize --out " + out + common) == 0);
  CHECK(run_cli("verify --policy " + out + "/running.policy --out " + out + common) == 0);
  CHECK(run_cli("check --policy " + out + "/running.policy --cert " + out +
                "/running.cert" + common) == 0);
  CHECK(run_cli("simulate --builtin running --policy " + out + "/running.policy --cert " +
                out + "/running.cert") == 0);
}
