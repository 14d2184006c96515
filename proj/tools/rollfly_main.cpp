// rollfly command-line front end: presets and config files in, CSV/JSON
// analysis artifacts out. Every command writes a manifest alongside its
// outputs; `rollfly rerun --manifest FILE` reproduces a run bit-identically.

#include "rollfly/analysis.hpp"
#include "rollfly/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rollfly;

namespace {

constexpr const char* kVersion = "1.0.0";

constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitIo = 4;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  os << text;
  if (!os) throw IoError("cannot write " + path.string());
}

void write_manifest(const fs::path& path, const std::string& command, const json& config,
                    const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = "rollfly";
  m["version"] = kVersion;
  m["command"] = command;
  m["timestamp_utc"] = timestamp_utc();
  m["config"] = config;
  m["outputs"] = outputs;
  write_text(path, m.dump(2) + "\n");
}

double fmt_or_nan(double v) { return std::isfinite(v) ? v : std::nan(""); }

// ---------------------------------------------------------------------------
// range-curve

PresetBundle bundle_for(const std::string& preset_name, Mode mode, double disk_radius_m) {
  if (preset_name != "titan")
    throw std::invalid_argument("unknown preset '" + preset_name + "' (available: titan)");
  PresetBundle b = preset(mode == Mode::rolling ? Preset::titan_roll : Preset::titan_fly);
  if (disk_radius_m > 0.0) b.params.disk_radius_m = disk_radius_m;
  return b;
}

void exec_range_curve(const json& cfg) {
  const std::string mode_s = cfg.at("mode");
  const Mode mode = mode_s == "roll" ? Mode::rolling : Mode::flying;
  const double slope = deg_to_rad(cfg.at("slope_deg").get<double>());
  const double crr = cfg.at("crr").get<double>();
  const PresetBundle b = bundle_for(cfg.at("preset"), mode, cfg.at("disk_radius_m"));

  Environment env = b.env;
  const auto violations = validate(b.params, env);
  if (!violations.empty()) throw std::invalid_argument(violations.front());
  if (!(crr >= 0.0 && crr <= 1.0)) throw std::invalid_argument("C_rr out of range [0, 1]");

  AnalysisOptions opt;
  opt.uniform_freestream = cfg.at("uniform_freestream").get<bool>();
  const Exec exec = cfg.at("serial").get<bool>() ? Exec::serial : Exec::parallel;
  const std::vector<double> grid = default_velocity_grid(cfg.at("samples"), cfg.at("v_min"),
                                                         cfg.at("v_max"));
  const RangeCurve curve = range_curve(mode, slope, crr, grid, b.params, env, b.eff, opt, exec);

  const fs::path out = cfg.at("out").get<std::string>();
  std::string csv = "v_mps,power_W,range_km\n";
  char line[128];
  for (const auto& s : curve.samples) {
    std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g\n", s.speed_mps,
                  s.feasible ? s.power_W : std::nan(""),
                  s.feasible ? fmt_or_nan(s.range_m / 1000.0) : std::nan(""));
    csv += line;
  }
  write_text(out, csv);

  json sidecar;
  sidecar["mode"] = mode_s;
  sidecar["slope_deg"] = cfg.at("slope_deg");
  sidecar["crr"] = crr;
  sidecar["v_opt_mps"] = curve.optimum.v_mps;
  sidecar["range_opt_km"] = fmt_or_nan(curve.optimum.range_m / 1000.0);
  const fs::path side = out.string() + ".opt.json";
  write_text(side, sidecar.dump(2) + "\n");

  write_manifest(out.string() + ".manifest.json", "range-curve", cfg,
                 {out.string(), side.string()});
}

// ---------------------------------------------------------------------------
// advantage-map

void exec_advantage_map(const json& cfg) {
  const double smin = deg_to_rad(cfg.at("slope_min_deg").get<double>());
  const double smax = deg_to_rad(cfg.at("slope_max_deg").get<double>());
  const double cmin = cfg.at("crr_min").get<double>();
  const double cmax = cfg.at("crr_max").get<double>();
  const int res = cfg.at("resolution").get<int>();
  if (!(cmin >= 0.0 && cmax <= 1.0 && cmin <= cmax))
    throw std::invalid_argument("C_rr range out of [0, 1] or inverted");
  if (!(smin <= smax)) throw std::invalid_argument("slope range inverted");
  if (res < 1) throw std::invalid_argument("resolution must be >= 1");

  PresetBundle roll = bundle_for(cfg.at("preset"), Mode::rolling, cfg.at("disk_radius_m"));
  PresetBundle fly = bundle_for(cfg.at("preset"), Mode::flying, cfg.at("disk_radius_m"));
  const Exec exec = cfg.at("serial").get<bool>() ? Exec::serial : Exec::parallel;

  const AdvantageGrid grid =
      advantage_map(smin, smax, cmin, cmax, res, roll.params, fly.params, roll.env, roll.eff,
                    AnalysisOptions{}, exec);

  const std::string prefix = cfg.at("out").get<std::string>();
  std::string csv = "slope_deg,crr,delta_range_km\n";
  char line[128];
  for (int si = 0; si < res; ++si)
    for (int ci = 0; ci < res; ++ci) {
      std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g\n", rad_to_deg(grid.slopes_rad[si]),
                    grid.crrs[ci], grid.delta(si, ci) / 1000.0);
      csv += line;
    }
  const fs::path grid_path = prefix + "_grid.csv";
  write_text(grid_path, csv);

  std::string xcsv = "slope_deg,crr\n";
  for (const auto& [s, c] : grid.crossover) {
    std::snprintf(line, sizeof line, "%.10g,%.10g\n", rad_to_deg(s), c);
    xcsv += line;
  }
  const fs::path xpath = prefix + "_crossover.csv";
  write_text(xpath, xcsv);

  write_manifest(prefix + "_manifest.json", "advantage-map", cfg,
                 {grid_path.string(), xpath.string()});
}

// ---------------------------------------------------------------------------
// simulate

json audit_to_json(const EnergyAudit& a) {
  json j;
  j["duration_s"] = a.duration_s;
  j["delta_kinetic_J"] = a.delta_kinetic_J;
  j["delta_potential_J"] = a.delta_potential_J;
  j["thrust_work_J"] = a.thrust_work_J;
  j["drag_dissipation_J"] = a.drag_dissipation_J;
  j["rolling_dissipation_J"] = a.rolling_dissipation_J;
  j["capture_loss_J"] = a.capture_loss_J;
  j["closure_residual_J"] = a.closure_residual_J;
  j["closure_residual_rel"] = a.closure_residual_rel;
  j["rotor_energy_J"] = a.rotor_energy_J;
  j["mean_power_W"] = a.mean_power_W;
  return j;
}

void exec_simulate(const json& cfg) {
  const fs::path out_dir = cfg.at("out").get<std::string>();
  fs::create_directories(out_dir);

  // The manifest embeds the config with terrain paths absolutized, so reruns
  // are location-independent. Parse from a staged copy next to the outputs.
  const fs::path staged = out_dir / "config.resolved.json";
  write_text(staged, cfg.at("sim").dump(2) + "\n");
  const SimConfig sim_cfg = load_sim_config(staged.string());

  const SimLog log = run(sim_cfg);

  std::ostringstream csv;
  write_csv(log, csv);
  const fs::path log_path = out_dir / "log.csv";
  write_text(log_path, csv.str());

  const EnergyAudit audit = energy_audit(log, sim_cfg.params, sim_cfg.env);
  json audit_j = audit_to_json(audit);

  // For single-segment flat-terrain runs, record the matching analytic
  // steady state and the mean power over the settled second half.
  const double t_end = log.rows.back().t_s;
  const double slope0 = sim_cfg.terrain.slope(0.0);
  const double slope_end = sim_cfg.terrain.slope(log.rows.back().position.x());
  const bool constant_slope = std::abs(slope_end - slope0) < 1e-12;
  if (sim_cfg.segments.size() == 1 && t_end > 1.0 && constant_slope) {
    const double window_mean = mean_power(log, 0.5 * t_end, t_end);
    audit_j["steady_window_mean_power_W"] = window_mean;
    const SimSegment& seg = sim_cfg.segments.front();
    const double slope = slope_end;
    if (seg.mode == SimMode::rolling) {
      const double v = seg.setpoint.body_rate_radps * sim_cfg.params.shell_radius_m;
      audit_j["analytic_power_W"] =
          rolling_steady_state(v, slope, sim_cfg.terrain.crr(), sim_cfg.params, sim_cfg.env,
                               sim_cfg.eff)
              .power_W;
    } else if (seg.mode == SimMode::flying) {
      audit_j["analytic_power_W"] =
          flying_steady_state(seg.setpoint.speed_mps, slope, sim_cfg.params, sim_cfg.env,
                              sim_cfg.eff)
              .power_W;
    }
  }
  const fs::path audit_path = out_dir / "audit.json";
  write_text(audit_path, audit_j.dump(2) + "\n");

  write_manifest(out_dir / "manifest.json", "simulate", cfg,
                 {log_path.string(), audit_path.string()});
}

// ---------------------------------------------------------------------------
// coverage

void exec_coverage(const json& cfg) {
  const double range_km = cfg.at("range_km").get<double>();
  if (range_km < 0.0) throw std::invalid_argument("range must be >= 0");
  const double area_m2 = coverage_area(range_km * 1000.0);
  json j;
  j["range_km"] = range_km;
  j["coverage_km2"] = area_m2 / 1e6;
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (cfg.contains("out") && !cfg.at("out").get<std::string>().empty()) {
    const fs::path out = cfg.at("out").get<std::string>();
    write_text(out, text);
    write_manifest(out.string() + ".manifest.json", "coverage", cfg, {out.string()});
  }
}

void dispatch(const std::string& command, const json& cfg) {
  if (command == "range-curve") exec_range_curve(cfg);
  else if (command == "advantage-map") exec_advantage_map(cfg);
  else if (command == "simulate") exec_simulate(cfg);
  else if (command == "coverage") exec_coverage(cfg);
  else throw std::invalid_argument("manifest names unknown command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rolling-vs-flying multirotor mobility analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // range-curve
  auto* rc = app.add_subcommand("range-curve", "steady-state range vs velocity table");
  std::string rc_mode, rc_preset = "titan", rc_out = "range_curve.csv";
  double rc_slope = 0.0, rc_crr = 0.01, rc_disk = 0.0, rc_vmin = 0.01, rc_vmax = 20.0;
  int rc_samples = 200;
  bool rc_uniform = false, rc_serial = false;
  rc->add_option("--mode", rc_mode, "roll|fly")->required()->check(CLI::IsMember({"roll", "fly"}));
  rc->add_option("--slope-deg", rc_slope, "terrain slope [deg]");
  rc->add_option("--crr", rc_crr, "rolling resistance coefficient");
  rc->add_option("--preset", rc_preset, "vehicle preset (titan)");
  rc->add_option("--disk-radius-m", rc_disk, "override rotor disk radius [m]");
  rc->add_option("--vmin", rc_vmin, "grid lower bound [m/s]");
  rc->add_option("--vmax", rc_vmax, "grid upper bound [m/s]");
  rc->add_option("--samples", rc_samples, "grid size")->check(CLI::Range(2, 100000));
  rc->add_flag("--uniform-freestream", rc_uniform, "simplified rolling power variant");
  rc->add_flag("--serial", rc_serial, "disable OpenMP sweep");
  rc->add_option("--out", rc_out, "output CSV path");

  // advantage-map
  auto* am = app.add_subcommand("advantage-map", "rolling-vs-flying range advantage grid");
  std::string am_preset = "titan", am_out = "advantage";
  double am_smin = -0.5, am_smax = 2.0, am_cmin = 0.01, am_cmax = 0.2, am_disk = 0.0;
  int am_res = 25;
  bool am_serial = false;
  am->add_option("--slope-min-deg", am_smin, "slope axis lower bound [deg]");
  am->add_option("--slope-max-deg", am_smax, "slope axis upper bound [deg]");
  am->add_option("--crr-min", am_cmin, "C_rr axis lower bound");
  am->add_option("--crr-max", am_cmax, "C_rr axis upper bound");
  am->add_option("--resolution", am_res, "grid resolution N (N x N cells)");
  am->add_option("--preset", am_preset, "vehicle preset (titan)");
  am->add_option("--disk-radius-m", am_disk, "override rotor disk radius [m]");
  am->add_flag("--serial", am_serial, "disable OpenMP sweep");
  am->add_option("--out", am_out, "output file prefix");

  // simulate
  auto* sc = app.add_subcommand("simulate", "closed-loop time-domain simulation");
  std::string sc_config, sc_out = "sim_out";
  sc->add_option("--config", sc_config, "SimConfig JSON file")->required();
  sc->add_option("--out", sc_out, "output directory");

  // coverage
  auto* cv = app.add_subcommand("coverage", "out-and-back survey disk area");
  double cv_range = 0.0;
  std::string cv_out;
  cv->add_option("--range-km", cv_range, "one-way range [km]")->required();
  cv->add_option("--out", cv_out, "optional JSON output path");

  // rerun
  auto* rr = app.add_subcommand("rerun", "re-execute a recorded manifest");
  std::string rr_manifest;
  rr->add_option("--manifest", rr_manifest, "manifest JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (rc->parsed()) {
      json cfg = {{"mode", rc_mode},       {"slope_deg", rc_slope},
                  {"crr", rc_crr},         {"preset", rc_preset},
                  {"disk_radius_m", rc_disk}, {"v_min", rc_vmin},
                  {"v_max", rc_vmax},      {"samples", rc_samples},
                  {"uniform_freestream", rc_uniform}, {"serial", rc_serial},
                  {"out", rc_out}};
      exec_range_curve(cfg);
    } else if (am->parsed()) {
      json cfg = {{"slope_min_deg", am_smin}, {"slope_max_deg", am_smax},
                  {"crr_min", am_cmin},       {"crr_max", am_cmax},
                  {"resolution", am_res},     {"preset", am_preset},
                  {"disk_radius_m", am_disk}, {"serial", am_serial},
                  {"out", am_out}};
      exec_advantage_map(cfg);
    } else if (sc->parsed()) {
      std::ifstream in(sc_config);
      if (!in) throw IoError("cannot open config " + sc_config);
      json sim_j;
      try {
        in >> sim_j;
      } catch (const json::parse_error& e) {
        throw ParseError(sc_config + ": " + e.what());
      }
      if (sim_j.contains("terrain") && sim_j["terrain"].contains("path")) {
        const fs::path p = sim_j["terrain"]["path"].get<std::string>();
        if (!p.is_absolute())
          sim_j["terrain"]["path"] =
              fs::absolute(fs::path(sc_config).parent_path() / p).lexically_normal().string();
      }
      json cfg = {{"sim", sim_j}, {"out", sc_out}};
      exec_simulate(cfg);
    } else if (cv->parsed()) {
      json cfg = {{"range_km", cv_range}};
      if (!cv_out.empty()) cfg["out"] = cv_out;
      exec_coverage(cfg);
    } else if (rr->parsed()) {
      std::ifstream in(rr_manifest);
      if (!in) throw IoError("cannot open manifest " + rr_manifest);
      json m;
      in >> m;
      dispatch(m.at("command").get<std::string>(), m.at("config"));
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "rollfly: infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const IoError& e) {
    std::cerr << "rollfly: i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "rollfly: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "rollfly: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "rollfly: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "rollfly: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
