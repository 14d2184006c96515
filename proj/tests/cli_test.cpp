// End-to-end checks of the rollfly binary: flags, exit codes, file outputs
// and manifest-driven reproducibility.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = ROLLFLY_CLI_PATH;

struct CmdResult {
  int exit_code;
  std::string stderr_text;
};

CmdResult run_cli(const std::string& args) {
  const fs::path err = fs::temp_directory_path() / "rollfly_cli_test.err";
  const int status = std::system((kCli + " " + args + " 2>" + err.string()).c_str());
  CmdResult r;
  r.exit_code = WEXITSTATUS(status);
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  r.stderr_text = ss.str();
  return r;
}

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("rollfly_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  json j;
  in >> j;
  return j;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int line_count(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("coverage command") {
  const fs::path dir = temp_dir("coverage");
  const fs::path out = dir / "cov.json";

  CHECK(run_cli("coverage --range-km 130 --out " + out.string()).exit_code == 0);
  CHECK(read_json(out)["coverage_km2"].get<double>() == doctest::Approx(13273.2290).epsilon(1e-6));

  CHECK(run_cli("coverage --range-km 260 --out " + out.string()).exit_code == 0);
  CHECK(read_json(out)["coverage_km2"].get<double>() == doctest::Approx(53092.9159).epsilon(1e-6));

  CHECK(run_cli("coverage --range-km 0 --out " + out.string()).exit_code == 0);
  CHECK(read_json(out)["coverage_km2"].get<double>() == 0.0);

  const CmdResult bad = run_cli("coverage --range-km -3");
  CHECK(bad.exit_code == 2);
  CHECK(!bad.stderr_text.empty());
}

TEST_CASE("range-curve command") {
  const fs::path dir = temp_dir("rangecurve");
  const fs::path out = dir / "roll.csv";

  CHECK(run_cli("range-curve --mode roll --slope-deg 0 --crr 0.01 --samples 50 --out " +
                out.string())
            .exit_code == 0);
  const std::string csv = read_file(out);
  CHECK(line_count(csv) == 51);  // header + samples
  CHECK(csv.rfind("v_mps,power_W,range_km\n", 0) == 0);

  const json sidecar = read_json(out.string() + ".opt.json");
  CHECK(sidecar["v_opt_mps"].get<double>() > 0.03);
  CHECK(sidecar["v_opt_mps"].get<double>() < 0.5);
  CHECK(sidecar["range_opt_km"].get<double>() > 0.0);

  SUBCASE("validation failures exit 2") {
    CHECK(run_cli("range-curve --mode roll --crr 1.5 --out " + out.string()).exit_code == 2);
    CHECK(run_cli("range-curve --mode walk --out " + out.string()).exit_code == 2);
    CHECK(run_cli("range-curve --out " + out.string()).exit_code == 2);  // --mode missing
  }
}

TEST_CASE("advantage-map command and manifest rerun") {
  const fs::path dir = temp_dir("advmap");
  const std::string prefix = (dir / "adv").string();

  CHECK(run_cli("advantage-map --slope-min-deg -0.5 --slope-max-deg 2 --crr-min 0.01 "
                "--crr-max 0.2 --resolution 3 --out " +
                prefix)
            .exit_code == 0);
  const std::string grid = read_file(prefix + "_grid.csv");
  CHECK(line_count(grid) == 10);  // header + 3x3 cells
  CHECK(fs::exists(prefix + "_crossover.csv"));

  SUBCASE("rerun reproduces the grid bit for bit") {
    const std::string first = read_file(prefix + "_grid.csv");
    CHECK(run_cli("rerun --manifest " + prefix + "_manifest.json").exit_code == 0);
    CHECK(read_file(prefix + "_grid.csv") == first);
  }

  SUBCASE("degenerate single-cell grid") {
    const std::string p1 = (dir / "one").string();
    CHECK(run_cli("advantage-map --slope-min-deg 0 --slope-max-deg 0 --crr-min 0.05 "
                  "--crr-max 0.05 --resolution 1 --out " +
                  p1)
              .exit_code == 0);
    CHECK(line_count(read_file(p1 + "_grid.csv")) == 2);
    CHECK(line_count(read_file(p1 + "_crossover.csv")) == 1);  // header only
  }
}

TEST_CASE("simulate command") {
  const fs::path dir = temp_dir("simulate");
  const fs::path cfg = dir / "roll.json";
  {
    std::ofstream os(cfg);
    os << R"({
      "preset": "titan_roll",
      "terrain": { "kind": "flat", "slope_deg": 0.0, "crr": 0.01 },
      "mode": "rolling",
      "setpoint": { "body_rate_radps": 0.7 },
      "dt_s": 0.001,
      "duration_s": 40.0,
      "log_decimation": 100
    })";
  }
  const fs::path out = dir / "out";
  CHECK(run_cli("simulate --config " + cfg.string() + " --out " + out.string()).exit_code == 0);
  CHECK(fs::exists(out / "log.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  const json audit = read_json(out / "audit.json");
  CHECK(audit["steady_window_mean_power_W"].get<double>() ==
        doctest::Approx(audit["analytic_power_W"].get<double>()).epsilon(0.02));

  SUBCASE("manifest rerun reproduces the log bit for bit") {
    const std::string log1 = read_file(out / "log.csv");
    CHECK(run_cli("rerun --manifest " + (out / "manifest.json").string()).exit_code == 0);
    CHECK(read_file(out / "log.csv") == log1);
  }

  SUBCASE("zero duration exits 2") {
    const fs::path bad = dir / "bad.json";
    std::ofstream os(bad);
    os << R"({
      "preset": "titan_roll",
      "terrain": { "kind": "flat" },
      "mode": "coast",
      "duration_s": 0.0
    })";
    os.close();
    CHECK(run_cli("simulate --config " + bad.string() + " --out " + (dir / "bad_out").string())
              .exit_code == 2);
  }

  SUBCASE("config field errors exit 2 and name the path") {
    const fs::path bad = dir / "nofield.json";
    std::ofstream os(bad);
    os << R"({ "preset": "titan_roll", "mode": "coast" })";
    os.close();
    const CmdResult r =
        run_cli("simulate --config " + bad.string() + " --out " + (dir / "nf_out").string());
    CHECK(r.exit_code == 2);
    CHECK(r.stderr_text.find("terrain") != std::string::npos);
  }

  SUBCASE("missing config file exits 4") {
    CHECK(run_cli("simulate --config /nonexistent/x.json --out " + (dir / "x").string())
              .exit_code == 4);
  }
}

TEST_CASE("infeasible flight setpoint exits 3") {
  const fs::path dir = temp_dir("infeasible");
  const fs::path cfg = dir / "fast_fly.json";
  {
    std::ofstream os(cfg);
    os << R"({
      "preset": "titan_fly",
      "terrain": { "kind": "flat" },
      "mode": "flying",
      "setpoint": { "speed_mps": 1.7, "altitude_m": 30.0 },
      "initial": { "speed_mps": 1.7, "altitude_m": 30.0 },
      "duration_s": 30.0
    })";
  }
  CHECK(run_cli("simulate --config " + cfg.string() + " --out " + (dir / "out").string())
            .exit_code == 3);
}

TEST_CASE("unknown flags exit 2") {
  CHECK(run_cli("range-curve --mode roll --frobnicate 3").exit_code == 2);
  CHECK(run_cli("nonsense-subcommand").exit_code == 2);
}
