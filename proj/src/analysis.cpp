#include "rollfly/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rollfly {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double phase_averaged_area(const VehicleParams& p) {
  // Mean of (h|cos a| + 2l|sin a|) w over a full revolution.
  return (2.0 / M_PI) * (p.rotor_height_m + 2.0 * p.shell_radius_m) * p.shell_width_m;
}

double range_from(double v, double power, double battery_J) {
  if (v <= 0.0) return 0.0;
  if (power <= 0.0) return kInf;  // unpowered terminal rolling downhill
  return v * battery_J / power;
}

}  // namespace

SteadyStateResult rolling_steady_state(double v_mps, double slope_rad, double crr,
                                       const VehicleParams& params, const Environment& env,
                                       const EfficiencyChain& eff, const AnalysisOptions& opt) {
  if (v_mps < 0.0) throw std::invalid_argument("rolling_steady_state: v must be >= 0");
  Environment local = env;
  local.slope_rad = slope_rad;
  local.rolling_resistance = crr;

  SteadyStateResult out;
  out.mode = Mode::rolling;
  out.speed_mps = v_mps;

  const double m = params.mass_kg;
  const double g = local.gravity_mps2;
  const double normal_load = m * g * std::cos(slope_rad);
  out.feasible = normal_load > 0.0;

  // Rolling resistance and drag oppose motion; at rest only gravity must be
  // held, so a flat-ground rest state needs no torque at all.
  const double drag = 0.5 * local.drag_coeff * local.air_density * phase_averaged_area(params) *
                      v_mps * v_mps;
  const double motion_resist = v_mps > 0.0 ? crr * normal_load + drag : 0.0;
  out.torque_Nm = params.shell_radius_m * (m * g * std::sin(slope_rad) + motion_resist);

  const double c = params.arm_length_m / std::sqrt(2.0);
  const double pair_force = std::abs(out.torque_Nm) / (4.0 * c);
  if (pair_force > params.rotor_thrust_max_N) out.feasible = false;

  // Active rotors of the pure-torque solution (pairs C, D upper, A, B lower).
  out.rotor_thrusts_N = {0.0, 0.0, pair_force, pair_force, pair_force, pair_force, 0.0, 0.0};

  out.power_W = vehicle_power_rolling_phase_averaged(v_mps, pair_force, params, local, eff,
                                                     opt.phase_samples, opt.uniform_freestream);
  out.range_m = range_from(v_mps, out.power_W, params.battery_J);
  return out;
}

SteadyStateResult flying_steady_state(double v_mps, double slope_rad,
                                      const VehicleParams& params, const Environment& env,
                                      const EfficiencyChain& eff, const AnalysisOptions& opt) {
  (void)opt;
  if (v_mps < 0.0) throw std::invalid_argument("flying_steady_state: v must be >= 0");

  SteadyStateResult out;
  out.mode = Mode::flying;
  out.speed_mps = v_mps;

  const double m = params.mass_kg;
  const double g = env.gravity_mps2;
  const double weight = m * g;
  const double ct = std::cos(slope_rad);
  const double st = std::sin(slope_rad);
  const double q = 0.5 * env.drag_coeff * env.air_density * v_mps * v_mps;

  // Drag magnitude at a candidate tilt; the area projection angle is the
  // pitch relative to the (slope-aligned) velocity direction.
  auto drag_at = [&](double tilt) { return q * aerodynamic_area(tilt - slope_rad, params); };
  // Tilt implied by the force balance at that drag.
  auto balance_tilt = [&](double tilt) {
    const double d = drag_at(tilt);
    return std::atan2(d * ct, weight + d * st);
  };

  double tilt = 0.0;
  if (v_mps > 0.0) {
    const double hi = deg_to_rad(60.0);
    if (balance_tilt(hi) - hi > 0.0) {
      out.feasible = false;  // no tilt solution below 60 deg
      out.pitch_rad = hi;
      return out;
    }
    double lo = 0.0;  // balance_tilt(0) - 0 >= 0
    double b = hi;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + b);
      if (balance_tilt(mid) - mid > 0.0)
        lo = mid;
      else
        b = mid;
    }
    tilt = 0.5 * (lo + b);
  }

  const double drag = drag_at(tilt);
  out.pitch_rad = tilt;
  out.thrust_N = std::hypot(drag * ct, weight + drag * st);
  const double per_rotor = out.thrust_N / params.rotor_count;
  if (per_rotor > params.rotor_thrust_max_N) out.feasible = false;
  for (int i = 0; i < params.rotor_count; ++i) out.rotor_thrusts_N[i] = per_rotor;

  // Rotor-model angle: the relative wind -v (cos t, 0, sin t) against disks
  // tilted by `tilt` gives sin(alpha) = -sin(tilt + slope).
  const double alpha_rotor = -(tilt + slope_rad);
  std::array<double, 8> thrusts = out.rotor_thrusts_N;
  out.power_W = vehicle_power_flying(v_mps, alpha_rotor,
                                     std::span<const double>(thrusts.data(), params.rotor_count),
                                     params, env, eff);
  out.range_m = range_from(v_mps, out.power_W, params.battery_J);
  return out;
}

std::vector<double> default_velocity_grid(int points, double v_min, double v_max) {
  if (points < 2 || !(v_min > 0.0) || !(v_max > v_min))
    throw std::invalid_argument("default_velocity_grid: need >= 2 points and 0 < v_min < v_max");
  std::vector<double> grid(points);
  const double ratio = v_max / v_min;
  for (int i = 0; i < points; ++i)
    grid[i] = v_min * std::pow(ratio, static_cast<double>(i) / (points - 1));
  return grid;
}

namespace {

struct RangeEval {
  double operator()(double v) const {
    const SteadyStateResult r =
        mode == Mode::rolling
            ? rolling_steady_state(v, slope, crr, *params, *env, *eff, *opt)
            : flying_steady_state(v, slope, *params, *env, *eff, *opt);
    return r.feasible ? r.range_m : -kInf;
  }
  Mode mode;
  double slope, crr;
  const VehicleParams* params;
  const Environment* env;
  const EfficiencyChain* eff;
  const AnalysisOptions* opt;
};

}  // namespace

Optimum optimal_velocity(Mode mode, double slope_rad, double crr, const VehicleParams& params,
                         const Environment& env, const EfficiencyChain& eff,
                         const AnalysisOptions& opt) {
  const RangeEval eval{mode, slope_rad, crr, &params, &env, &eff, &opt};
  const std::vector<double> grid = default_velocity_grid();

  int best = -1;
  double best_range = -kInf;
  std::vector<double> ranges(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    ranges[i] = eval(grid[i]);
    if (ranges[i] > best_range) {
      best_range = ranges[i];
      best = static_cast<int>(i);
    }
  }
  if (best < 0 || best_range == -kInf)
    throw InfeasibleError("optimal_velocity: no feasible velocity on the search grid");

  double a = grid[best > 0 ? best - 1 : best];
  double b = grid[best + 1 < static_cast<int>(grid.size()) ? best + 1 : best];
  double best_v = grid[best];

  // Golden-section refinement of the bracket around the grid maximum.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > 1e-4) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = eval(d);
    }
  }
  const double v_ref = 0.5 * (a + b);
  const double r_ref = eval(v_ref);
  if (r_ref >= best_range) return {v_ref, r_ref};
  return {best_v, best_range};
}

RangeCurve range_curve(Mode mode, double slope_rad, double crr, std::span<const double> v_grid,
                       const VehicleParams& params, const Environment& env,
                       const EfficiencyChain& eff, const AnalysisOptions& opt, Exec exec) {
  if (v_grid.empty()) throw std::invalid_argument("range_curve: empty velocity grid");
  for (double v : v_grid)
    if (!(v > 0.0)) throw std::invalid_argument("range_curve: grid velocities must be > 0");

  RangeCurve curve;
  curve.mode = mode;
  curve.slope_rad = slope_rad;
  curve.crr = crr;
  curve.samples.resize(v_grid.size());

  const auto cell = [&](int i) {
    curve.samples[i] = mode == Mode::rolling
                           ? rolling_steady_state(v_grid[i], slope_rad, crr, params, env, eff, opt)
                           : flying_steady_state(v_grid[i], slope_rad, params, env, eff, opt);
  };
  const int n = static_cast<int>(v_grid.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) cell(i);
  } else {
    for (int i = 0; i < n; ++i) cell(i);
  }

  curve.optimum = optimal_velocity(mode, slope_rad, crr, params, env, eff, opt);
  for (const auto& s : curve.samples)
    if (s.feasible && s.range_m > curve.optimum.range_m)
      curve.optimum = {s.speed_mps, s.range_m};
  return curve;
}

AdvantageGrid advantage_map(double slope_min_rad, double slope_max_rad, double crr_min,
                            double crr_max, int resolution, const VehicleParams& roll_params,
                            const VehicleParams& fly_params, const Environment& env,
                            const EfficiencyChain& eff, const AnalysisOptions& opt, Exec exec) {
  if (resolution < 1) throw std::invalid_argument("advantage_map: resolution must be >= 1");

  AdvantageGrid grid;
  grid.slopes_rad.resize(resolution);
  grid.crrs.resize(resolution);
  for (int i = 0; i < resolution; ++i) {
    const double f = resolution == 1 ? 0.0 : static_cast<double>(i) / (resolution - 1);
    grid.slopes_rad[i] = slope_min_rad + f * (slope_max_rad - slope_min_rad);
    grid.crrs[i] = crr_min + f * (crr_max - crr_min);
  }

  const int cells = resolution * resolution;
  grid.delta_range_m.resize(cells);
  grid.roll_range_m.resize(cells);
  grid.fly_range_m.resize(cells);

  const auto cell = [&](int idx) {
    const int si = idx / resolution;
    const int ci = idx % resolution;
    const Optimum roll =
        optimal_velocity(Mode::rolling, grid.slopes_rad[si], grid.crrs[ci], roll_params, env, eff, opt);
    const Optimum fly =
        optimal_velocity(Mode::flying, grid.slopes_rad[si], grid.crrs[ci], fly_params, env, eff, opt);
    grid.roll_range_m[idx] = roll.range_m;
    grid.fly_range_m[idx] = fly.range_m;
    grid.delta_range_m[idx] = roll.range_m - fly.range_m;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int idx = 0; idx < cells; ++idx) cell(idx);
  } else {
    for (int idx = 0; idx < cells; ++idx) cell(idx);
  }

  for (int si = 0; si < resolution; ++si) {
    for (int ci = 0; ci + 1 < resolution; ++ci) {
      const double d0 = grid.delta(si, ci);
      const double d1 = grid.delta(si, ci + 1);
      if (!std::isfinite(d0) || !std::isfinite(d1)) continue;
      if ((d0 > 0.0 && d1 < 0.0) || (d0 < 0.0 && d1 > 0.0) || d0 == 0.0) {
        const double f = d0 == 0.0 ? 0.0 : d0 / (d0 - d1);
        grid.crossover.emplace_back(grid.slopes_rad[si],
                                    grid.crrs[ci] + f * (grid.crrs[ci + 1] - grid.crrs[ci]));
      }
    }
  }
  return grid;
}

double coverage_area(double one_way_range_m) {
  if (one_way_range_m < 0.0) throw std::invalid_argument("coverage_area: range must be >= 0");
  const double radius = 0.5 * one_way_range_m;
  return M_PI * radius * radius;
}

}  // namespace rollfly
