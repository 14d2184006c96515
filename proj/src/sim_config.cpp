#include "rollfly/sim.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>

namespace rollfly {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError("config field '" + path + "': " + what);
}

double need_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double get_number(const json& j, const char* key, const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  return need_number(j.at(key), path + "." + key);
}

std::string need_string(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) fail(path, std::string("missing required key '") + key + "'");
  if (!j.at(key).is_string()) fail(path + "." + key, "expected a string");
  return j.at(key).get<std::string>();
}

void apply_overrides(const json& j, const std::string& path, VehicleParams& p, Environment& e,
                     EfficiencyChain& eff) {
  for (const auto& [key, value] : j.items()) {
    const std::string fp = path + "." + key;
    const double v = need_number(value, fp);
    if (key == "mass_kg") p.mass_kg = v;
    else if (key == "shell_radius_m") p.shell_radius_m = v;
    else if (key == "shell_width_m") p.shell_width_m = v;
    else if (key == "rotor_height_m") p.rotor_height_m = v;
    else if (key == "arm_length_m") p.arm_length_m = v;
    else if (key == "thrust_coeff") p.thrust_coeff = v;
    else if (key == "torque_coeff") p.torque_coeff = v;
    else if (key == "rotor_count") p.rotor_count = static_cast<int>(v);
    else if (key == "disk_radius_m") p.disk_radius_m = v;
    else if (key == "battery_J") p.battery_J = v;
    else if (key == "rotor_thrust_max_N") p.rotor_thrust_max_N = v;
    else if (key == "gravity_mps2") e.gravity_mps2 = v;
    else if (key == "air_density") e.air_density = v;
    else if (key == "drag_coeff") e.drag_coeff = v;
    else if (key == "eta_propeller") eff.propeller = v;
    else if (key == "eta_motor") eff.motor = v;
    else if (key == "eta_controller") eff.controller = v;
    else fail(fp, "unknown override key");
  }
}

SimMode parse_mode(const std::string& s, const std::string& path) {
  if (s == "rolling") return SimMode::rolling;
  if (s == "flying") return SimMode::flying;
  if (s == "coast") return SimMode::coast;
  fail(path, "expected 'rolling', 'flying' or 'coast'");
}

Setpoint parse_setpoint(const json& j, SimMode mode, const std::string& path) {
  Setpoint sp;
  if (mode == SimMode::rolling) {
    if (!j.contains("body_rate_radps")) fail(path, "rolling setpoint needs 'body_rate_radps'");
    sp.body_rate_radps = need_number(j.at("body_rate_radps"), path + ".body_rate_radps");
  } else if (mode == SimMode::flying) {
    if (!j.contains("speed_mps")) fail(path, "flying setpoint needs 'speed_mps'");
    sp.speed_mps = need_number(j.at("speed_mps"), path + ".speed_mps");
    sp.altitude_m = get_number(j, "altitude_m", path, 10.0);
  }
  return sp;
}

Terrain parse_terrain(const json& j, const std::filesystem::path& base, const std::string& path) {
  const std::string kind = need_string(j, "kind", path);
  const double crr = get_number(j, "crr", path, 0.01);
  if (kind == "flat")
    return Terrain::flat(deg_to_rad(get_number(j, "slope_deg", path, 0.0)), crr);
  if (kind == "profile_csv" || kind == "heightmap_asc") {
    const std::string rel = need_string(j, "path", path);
    const std::filesystem::path file = std::filesystem::path(rel).is_absolute()
                                           ? std::filesystem::path(rel)
                                           : base / rel;
    return load_terrain(file.string(),
                        kind == "profile_csv" ? TerrainFormat::csv_profile
                                              : TerrainFormat::ascii_grid,
                        crr);
  }
  fail(path + ".kind", "expected 'flat', 'profile_csv' or 'heightmap_asc'");
}

}  // namespace

SimConfig load_sim_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }

  SimConfig cfg;
  const std::filesystem::path base = std::filesystem::path(path).parent_path();

  if (j.contains("preset")) {
    const PresetBundle b = preset_by_name(need_string(j, "preset", "config"));
    cfg.params = b.params;
    cfg.env = b.env;
    cfg.eff = b.eff;
  } else if (!j.contains("overrides")) {
    fail("config", "either 'preset' or a full 'overrides' block is required");
  }
  if (j.contains("overrides"))
    apply_overrides(j.at("overrides"), "config.overrides", cfg.params, cfg.env, cfg.eff);

  if (!j.contains("terrain")) fail("config", "missing required key 'terrain'");
  cfg.terrain = parse_terrain(j.at("terrain"), base, "config.terrain");

  cfg.dt_s = get_number(j, "dt_s", "config", cfg.dt_s);
  cfg.duration_s = get_number(j, "duration_s", "config", cfg.duration_s);
  cfg.log_decimation = static_cast<int>(get_number(j, "log_decimation", "config",
                                                   cfg.log_decimation));
  if (j.contains("integrator")) {
    const std::string s = need_string(j, "integrator", "config");
    if (s == "rk4") cfg.integrator = Integrator::rk4;
    else if (s == "semi_implicit_euler") cfg.integrator = Integrator::semi_implicit_euler;
    else fail("config.integrator", "expected 'rk4' or 'semi_implicit_euler'");
  }

  if (j.contains("segments")) {
    const json& segs = j.at("segments");
    if (!segs.is_array() || segs.empty()) fail("config.segments", "expected a non-empty array");
    for (size_t i = 0; i < segs.size(); ++i) {
      const std::string sp = "config.segments[" + std::to_string(i) + "]";
      SimSegment seg;
      seg.until_s = need_number(segs[i].contains("until_s") ? segs[i].at("until_s") : json(),
                                sp + ".until_s");
      seg.mode = parse_mode(need_string(segs[i], "mode", sp), sp + ".mode");
      seg.setpoint = parse_setpoint(segs[i].contains("setpoint") ? segs[i].at("setpoint") : json::object(),
                                    seg.mode, sp + ".setpoint");
      cfg.segments.push_back(seg);
    }
  } else {
    if (!j.contains("mode")) fail("config", "missing 'mode' (or a 'segments' array)");
    SimSegment seg;
    seg.until_s = cfg.duration_s;
    seg.mode = parse_mode(need_string(j, "mode", "config"), "config.mode");
    seg.setpoint = parse_setpoint(j.contains("setpoint") ? j.at("setpoint") : json::object(),
                                  seg.mode, "config.setpoint");
    cfg.segments.push_back(seg);
  }

  if (j.contains("controller")) {
    const json& c = j.at("controller");
    const double kp = get_number(c, "kp", "config.controller", 0.05);
    const double ki = get_number(c, "ki", "config.controller", 0.02);
    cfg.rate_controller.kp = Vec3(kp, kp, kp);
    cfg.rate_controller.ki = Vec3(ki, ki, ki);
    cfg.rate_controller.integral_limit =
        get_number(c, "integral_limit", "config.controller", 0.5);
  }
  if (j.contains("initial")) {
    const json& c = j.at("initial");
    cfg.initial_speed_mps = get_number(c, "speed_mps", "config.initial", 0.0);
    if (c.contains("altitude_m"))
      cfg.initial_altitude_m = need_number(c.at("altitude_m"), "config.initial.altitude_m");
  }
  if (j.contains("noise")) {
    const json& c = j.at("noise");
    cfg.noise_stddev_radps = get_number(c, "stddev_radps", "config.noise", 0.0);
    cfg.noise_seed = static_cast<std::uint32_t>(get_number(c, "seed", "config.noise", 1.0));
  }
  return cfg;
}

}  // namespace rollfly
