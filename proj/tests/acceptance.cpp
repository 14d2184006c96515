// Acceptance suite: one criterion per subcommand, one PASS/FAIL line per
// check, nonzero exit when any selected check fails. Run `acceptance all`
// for the full gate. Never compiled out: plain checks, no test framework.

#include "rollfly/analysis.hpp"
#include "rollfly/sim.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace rollfly;
using nlohmann::json;

namespace {

int g_checks = 0;
int g_failures = 0;

void report(bool ok, const char* tag, const std::string& detail) {
  ++g_checks;
  if (!ok) ++g_failures;
  std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", tag, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

constexpr double kCalibratedDiskRadius = 0.05;  // m, chosen once in [0.05, 0.10]

PresetBundle calibrated(Preset p) {
  PresetBundle b = preset(p);
  b.params.disk_radius_m = kCalibratedDiskRadius;
  return b;
}

struct ReferenceOptima {
  Optimum roll, fly;
};

ReferenceOptima reference_optima() {
  const PresetBundle roll = calibrated(Preset::titan_roll);
  const PresetBundle fly = calibrated(Preset::titan_fly);
  ReferenceOptima out;
  out.roll = optimal_velocity(Mode::rolling, 0.0, 0.01, roll.params, roll.env, roll.eff);
  out.fly = optimal_velocity(Mode::flying, 0.0, 0.01, fly.params, fly.env, fly.eff);
  return out;
}

// -------------------------------------------------------------------- C1

void criterion1() {
  const ReferenceOptima o = reference_optima();

  report(o.roll.v_mps >= 0.07 && o.roll.v_mps <= 0.28, "C1",
         fmt("rolling optimum v* = %.4f m/s in [0.07, 0.28]", o.roll.v_mps));
  const double roll_km = o.roll.range_m / 1000.0;
  report(std::abs(roll_km - 267.0) <= 0.35 * 267.0, "C1",
         fmt("rolling optimum R* = %.1f km within 267 km +/- 35%% "
             "(residual %+.1f km)",
             roll_km, roll_km - 267.0));

  report(o.fly.v_mps >= 1.0 && o.fly.v_mps <= 2.9, "C1",
         fmt("flying optimum v* = %.4f m/s in [1.0, 2.9]", o.fly.v_mps));
  const double fly_km = o.fly.range_m / 1000.0;
  report(std::abs(fly_km - 135.0) <= 0.35 * 135.0, "C1",
         fmt("flying optimum R* = %.1f km within 135 km +/- 35%% (residual %+.1f km)", fly_km,
             fly_km - 135.0));

  // The committed calibration must match what the library computes now.
  std::ifstream in(ROLLFLY_CALIBRATION_PATH);
  if (!in) {
    report(false, "C1", std::string("calibration file missing: ") + ROLLFLY_CALIBRATION_PATH);
    return;
  }
  json cal;
  in >> cal;
  const bool disk_ok = cal["disk_radius_m"].get<double>() == kCalibratedDiskRadius;
  const bool values_ok =
      std::abs(cal["rolling"]["v_opt_mps"].get<double>() - o.roll.v_mps) < 0.01 * o.roll.v_mps &&
      std::abs(cal["rolling"]["range_opt_km"].get<double>() - roll_km) < 0.01 * roll_km &&
      std::abs(cal["flying"]["v_opt_mps"].get<double>() - o.fly.v_mps) < 0.01 * o.fly.v_mps &&
      std::abs(cal["flying"]["range_opt_km"].get<double>() - fly_km) < 0.01 * fly_km;
  report(disk_ok && values_ok, "C1",
         fmt("committed calibration (r_disk = %.3f m) matches recomputed optima within 1%%",
             cal["disk_radius_m"].get<double>()));
}

void write_calibration() {
  const ReferenceOptima o = reference_optima();
  json cal;
  cal["disk_radius_m"] = kCalibratedDiskRadius;
  cal["rolling"]["v_opt_mps"] = o.roll.v_mps;
  cal["rolling"]["range_opt_km"] = o.roll.range_m / 1000.0;
  cal["rolling"]["target_v_window_mps"] = {0.07, 0.28};
  cal["rolling"]["target_range_km"] = 267.0;
  cal["rolling"]["range_residual_km"] = o.roll.range_m / 1000.0 - 267.0;
  cal["flying"]["v_opt_mps"] = o.fly.v_mps;
  cal["flying"]["range_opt_km"] = o.fly.range_m / 1000.0;
  cal["flying"]["target_v_window_mps"] = {1.0, 2.9};
  cal["flying"]["target_range_km"] = 135.0;
  cal["flying"]["range_residual_km"] = o.fly.range_m / 1000.0 - 135.0;
  std::ofstream os(ROLLFLY_CALIBRATION_PATH);
  os << cal.dump(2) << "\n";
  std::printf("calibration written to %s\n", ROLLFLY_CALIBRATION_PATH);
}

// -------------------------------------------------------------------- C2

void criterion2() {
  const ReferenceOptima o = reference_optima();
  const double ratio = o.roll.range_m / o.fly.range_m;
  report(ratio >= 1.5 && ratio <= 2.6, "C2",
         fmt("range ratio R_roll/R_fly = %.2f in [1.5, 2.6]", ratio));
  report(o.roll.v_mps < o.fly.v_mps, "C2",
         fmt("optimal-velocity ordering v*_roll = %.3f < v*_fly = %.3f", o.roll.v_mps,
             o.fly.v_mps));
}

// -------------------------------------------------------------------- C3

void criterion3() {
  const PresetBundle roll = calibrated(Preset::titan_roll);
  const PresetBundle fly = calibrated(Preset::titan_fly);
  const int res = 25;
  const AdvantageGrid g = advantage_map(deg_to_rad(-0.5), deg_to_rad(2.0), 0.01, 0.2, res,
                                        roll.params, fly.params, roll.env, roll.eff);

  const double corner_km = g.delta(0, 0) / 1000.0;
  report(corner_km >= 100.0 && corner_km <= 300.0, "C3",
         fmt("delta-R at (-0.5 deg, 0.01) = %.1f km within +200 km +/- 50%%", corner_km));

  bool negative = false;
  double most_negative = 0.0;
  for (double d : g.delta_range_m)
    if (d < most_negative) {
      negative = true;
      most_negative = d;
    }
  report(negative, "C3",
         fmt("delta-R < 0 somewhere in the box (most negative %.1f km)", most_negative / 1000.0));

  bool monotone = true;
  for (int si = 0; si < res && monotone; ++si)
    for (int ci = 0; ci + 1 < res; ++ci)
      if (g.delta(si, ci + 1) > g.delta(si, ci) + 1.0) {
        monotone = false;
        break;
      }
  for (int ci = 0; ci < res && monotone; ++ci)
    for (int si = 0; si + 1 < res; ++si)
      if (g.delta(si + 1, ci) > g.delta(si, ci) + 1.0) {
        monotone = false;
        break;
      }
  report(monotone, "C3", "delta-R monotone nonincreasing along both grid axes");
}

// -------------------------------------------------------------------- C4

struct OperatingPoint {
  Mode mode;
  double v, slope, crr;
};

void criterion4() {
  std::mt19937 rng(20250810);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  std::vector<OperatingPoint> points;
  while (points.size() < 10) {
    OperatingPoint p{Mode::rolling, 0.06 + 0.54 * u01(rng), deg_to_rad(-0.4 + 2.2 * u01(rng)),
                     0.01 + 0.17 * u01(rng)};
    points.push_back(p);
  }
  const PresetBundle flyb = preset(Preset::titan_fly);
  while (points.size() < 20) {
    OperatingPoint p{Mode::flying, 0.3 + 0.9 * u01(rng), deg_to_rad(-0.4 + 2.2 * u01(rng)),
                     0.01};
    const auto ss = flying_steady_state(p.v, p.slope, flyb.params, flyb.env, flyb.eff);
    if (!ss.feasible || ss.pitch_rad > deg_to_rad(55.0)) continue;  // resample near the envelope
    points.push_back(p);
  }

  double worst = 0.0;
  int pass_count = 0;
  for (const auto& p : points) {
    const PresetBundle b =
        preset(p.mode == Mode::rolling ? Preset::titan_roll : Preset::titan_fly);
    SimConfig cfg;
    cfg.params = b.params;
    cfg.env = b.env;
    cfg.eff = b.eff;
    cfg.terrain = Terrain::flat(p.slope, p.crr);
    cfg.duration_s = 600.0;
    cfg.dt_s = 1e-3;
    cfg.log_decimation = 1000;

    double analytic = 0.0;
    if (p.mode == Mode::rolling) {
      cfg.segments = {{600.0, SimMode::rolling,
                       {.body_rate_radps = p.v / b.params.shell_radius_m}}};
      cfg.rate_controller.kp = Vec3(0.4, 0.4, 0.4);
      cfg.rate_controller.ki = Vec3(0.15, 0.15, 0.15);
      cfg.rate_controller.integral_limit = 50.0;
      cfg.initial_speed_mps = p.v;  // start rolling at the setpoint
      analytic =
          rolling_steady_state(p.v, p.slope, p.crr, b.params, b.env, b.eff).power_W;
    } else {
      cfg.segments = {{600.0, SimMode::flying, {.speed_mps = p.v, .altitude_m = 30.0}}};
      cfg.initial_altitude_m = 30.0;
      cfg.initial_speed_mps = p.v * std::cos(p.slope);
      analytic = flying_steady_state(p.v, p.slope, b.params, b.env, b.eff).power_W;
    }

    const SimLog log = run(cfg);
    const double sim_mean = mean_power(log, 200.0, 600.0);
    const double err = std::abs(sim_mean - analytic) / analytic;
    worst = std::max(worst, err);
    if (err <= 0.02) ++pass_count;
  }
  report(pass_count == 20, "C4",
         fmt("600 s closed-loop mean power within 2%% of steady-state analysis at 20 random "
             "operating points (%d/20, worst %.2f%%)",
             pass_count, 100.0 * worst));
}

// -------------------------------------------------------------------- C5

void criterion5() {
  // Allocation round trip over 1e5 random pure-torque wrenches.
  {
    const PresetBundle b = preset(Preset::titan_roll);
    const Eigen::Matrix4d m = allocation_matrix(b.params);
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
      Wrench w;
      w.torque_Nm = Vec3(u(rng), u(rng), 0.05 * u(rng));
      const PairForces f = allocate(w, b.params);
      const Eigen::Vector4d back = m * Eigen::Vector4d(f.a, f.b, f.c, f.d);
      const Eigen::Vector4d want(0.0, w.torque_Nm.x(), w.torque_Nm.y(), w.torque_Nm.z());
      worst = std::max(worst, (back - want).cwiseAbs().maxCoeff());
    }
    report(worst < 1e-9, "C5", fmt("allocation round-trip error %.2e < 1e-9 over 1e5 wrenches",
                                   worst));
  }

  // Momentum-relation residual over 1e3 random operating points.
  {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> uf(0.0, 12.0);
    std::uniform_real_distribution<double> uv(0.0, 20.0);
    std::uniform_real_distribution<double> ua(-M_PI_2, M_PI_2);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double f = uf(rng), v = uv(rng), a = ua(rng);
      const double nu = induced_velocity(f, v, a, 5.4, 0.0762);
      worst = std::max(worst, glauert_residual(nu, f, v, a, 5.4, 0.0762));
    }
    report(worst < 1e-10, "C5",
           fmt("induced-velocity residual %.2e < 1e-10 over 1e3 operating points", worst));
  }

  // Energy-audit closure: conservative scenario < 0.1%, all shipped < 0.5%.
  {
    const std::string dir = ROLLFLY_CONFIGS_DIR;
    const SimConfig cons = load_sim_config(dir + "/conservative_coast.json");
    const EnergyAudit ca = energy_audit(run(cons), cons.params, cons.env);
    report(ca.closure_residual_rel < 1e-3, "C5",
           fmt("conservative-scenario audit closure %.2e < 0.1%%", ca.closure_residual_rel));

    double worst = 0.0;
    std::string worst_name = "-";
    for (const char* name : {"flat_roll.json", "flat_fly.json", "slope_roll.json",
                             "hills_roll.json", "brake_coast.json"}) {
      const SimConfig cfg = load_sim_config(dir + "/" + name);
      const EnergyAudit a = energy_audit(run(cfg), cfg.params, cfg.env);
      if (a.closure_residual_rel > worst) {
        worst = a.closure_residual_rel;
        worst_name = name;
      }
    }
    report(worst < 5e-3, "C5",
           fmt("all shipped scenarios close within 0.5%% (worst %.2e, %s)", worst,
               worst_name.c_str()));
  }

  // Rolling -> flying reduction identity at machine precision.
  {
    const PresetBundle b = preset(Preset::titan_roll);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      RigidBodyState s;
      s.position = Vec3(u(rng), 0.0, 5.0 + u(rng));
      s.velocity = Vec3(u(rng), 0.0, u(rng));
      s.attitude = rotation_about_y(2.0 * u(rng));
      s.body_rates = Vec3(0.0, 3.0 * u(rng), 0.0);
      Wrench w;
      w.thrust_N = 2.0 * std::abs(u(rng));
      w.torque_Nm = Vec3(0.0, 0.5 * u(rng), 0.0);
      const StateDerivative r = derivatives_with_contact(s, w, b.params, b.env, ContactInfo{});
      const StateDerivative f = flying_derivatives(s, w, b.params, b.env);
      worst = std::max(worst, (r.acceleration - f.acceleration).norm() +
                                  (r.body_rate_dot - f.body_rate_dot).norm());
    }
    report(worst == 0.0, "C5",
           fmt("rolling/flying reduction identity exact (max deviation %.1e)", worst));
  }

  // Measured rk4 convergence order on the smooth flying scenario.
  {
    const PresetBundle b = preset(Preset::titan_fly);
    const Terrain t = Terrain::flat(0.0, 0.0);
    RotorSpeeds speeds;
    const double base = 1.2 * b.params.mass_kg * b.env.gravity_mps2 / 4.0;
    const double scale[4] = {0.9, 0.9, 1.1, 1.1};
    for (int i = 0; i < 4; ++i)
      speeds.n[i] = std::sqrt(base * scale[i] / b.params.thrust_coeff);
    const auto endpoint = [&](double dt) {
      RigidBodyState s;
      s.position = Vec3(0.0, 0.0, 50.0);
      s.velocity = Vec3(2.0, 0.0, 0.0);
      s.attitude = rotation_about_y(0.3);
      const int n = static_cast<int>(std::llround(1.0 / dt));
      for (int i = 0; i < n; ++i) s = step(s, speeds, t, b.params, b.env, dt, Integrator::rk4);
      return s;
    };
    const RigidBodyState ref = endpoint(2.5e-4);
    const auto err = [&](double dt) {
      const RigidBodyState s = endpoint(dt);
      return (s.position - ref.position).norm() + (s.velocity - ref.velocity).norm() +
             (s.body_rates - ref.body_rates).norm();
    };
    const double order = std::log2(err(2e-2) / err(1e-2));
    report(order >= 3.5, "C5", fmt("measured rk4 convergence order %.2f >= 3.5", order));
  }

  // Rotation orthonormality after 1e6 random compositions.
  {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    Rotation r;
    for (int i = 0; i < 1000000; ++i) r = r * rotation_about_y(angle(rng));
    report(r.orthonormality_error() < 1e-9, "C5",
           fmt("orthonormality error %.2e < 1e-9 after 1e6 compositions",
               r.orthonormality_error()));
  }
}

// -------------------------------------------------------------------- C6

void criterion6() {
  const std::string tmp =
      (std::filesystem::temp_directory_path() / "rollfly_acceptance_coverage.json").string();
  bool all_ok = true;
  std::string detail;
  for (const auto& [range_km, label] : {std::pair{130.0, "over 10,000 km^2"},
                                        std::pair{260.0, "more than 50,000 km^2"}}) {
    std::ostringstream cmd;
    cmd << ROLLFLY_CLI_PATH << " coverage --range-km " << range_km << " --out " << tmp
        << " > /dev/null";
    if (std::system(cmd.str().c_str()) != 0) {
      all_ok = false;
      detail = "cli invocation failed";
      break;
    }
    std::ifstream in(tmp);
    json j;
    in >> j;
    const double got = j["coverage_km2"].get<double>();
    const double want = M_PI * (range_km / 2.0) * (range_km / 2.0);
    if (std::abs(got - want) / want > 5e-5) {  // 4 significant figures
      all_ok = false;
      detail = fmt("%.0f km -> %.4f km^2, expected %.4f", range_km, got, want);
      break;
    }
    detail += fmt("%s%.0f km -> %.2f km^2 (%s)", detail.empty() ? "" : "; ", range_km, got,
                  label);
  }
  std::remove(tmp.c_str());
  std::remove((tmp + ".manifest.json").c_str());
  report(all_ok, "C6", "coverage arithmetic pi*(range/2)^2 to 4 significant figures: " + detail);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "all";
  if (which == "--write-calibration") {
    write_calibration();
    return 0;
  }
  const bool all = which == "all";
  if (all || which == "c1") criterion1();
  if (all || which == "c2") criterion2();
  if (all || which == "c3") criterion3();
  if (all || which == "c4") criterion4();
  if (all || which == "c5") criterion5();
  if (all || which == "c6") criterion6();
  std::printf("%d/%d acceptance checks passed\n", g_checks - g_failures, g_checks);
  return g_failures == 0 ? 0 : 1;
}
