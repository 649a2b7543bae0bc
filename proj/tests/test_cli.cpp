// End-to-end checks of the qlab binary: subcommands, config plumbing and
// exit codes (0 success, 2 usage/config, 3 invariant violated, 4 solver).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

#ifndef QLAB_BIN
#error "QLAB_BIN must point at the built qlab executable"
#endif

int run(const std::string& args) {
  const std::string cmd = std::string(QLAB_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << text;
  return p;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run("") == 2);                   // missing subcommand
  CHECK(run("no-such-subcommand") == 2);
  CHECK(run("cone-census --config /no/such/file.cfg") == 2);
}

TEST_CASE("config for a different experiment is a usage error") {
  const fs::path cfg = write_config("qlab_mismatch.cfg", "experiment = cone-census\n");
  CHECK(run("quarter-frequency --config " + cfg.string()) == 2);
}

TEST_CASE("resolution error exits with 2") {
  const fs::path cfg = write_config("qlab_badh.cfg", "h = 2.0\n");
  CHECK(run("quarter-frequency --config " + cfg.string()) == 2);
}

TEST_CASE("solver non-convergence exits with 4") {
  const fs::path cfg = write_config("qlab_nonconv.cfg",
                                    "h = 0.125\n[solver]\ntol = 1e-15\nmax_sweeps = 2\n");
  CHECK(run("quarter-frequency --config " + cfg.string()) == 4);
}

TEST_CASE("experiment invariant violation exits with 3") {
  const fs::path cfg =
      write_config("qlab_offset.cfg", "h = 0.125\ntrace = offset\noracle_mode = true\n");
  CHECK(run("cylinder-singularity --config " + cfg.string()) == 3);
}

TEST_CASE("cone census runs clean and writes outputs") {
  const fs::path out = fs::temp_directory_path() / "qlab_cli_census";
  fs::remove_all(out);
  CHECK(run("cone-census --out " + out.string()) == 0);
  CHECK(fs::exists(out / "census.csv"));
  CHECK(fs::exists(out / "manifest.txt"));
}

TEST_CASE("cylinder singularity in oracle mode exits 0 and writes the report") {
  const fs::path cfg = write_config("qlab_cyl.cfg", "h = 0.125\n");
  const fs::path out = fs::temp_directory_path() / "qlab_cli_cyl";
  fs::remove_all(out);
  CHECK(run("cylinder-singularity --oracle-mode --config " + cfg.string() + " --out " +
            out.string()) == 0);
  CHECK(fs::exists(out / "singularity_report.txt"));
  CHECK(fs::exists(out / "eta_field.txt"));
}

TEST_CASE("excess decay accepts a threads cap") {
  const fs::path cfg = write_config("qlab_excess.cfg", "[excess]\ndelta = 0.125\n");
  CHECK(run("excess-decay --threads 2 --config " + cfg.string()) == 0);
}
