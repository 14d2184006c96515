#include "rollfly/power.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rollfly {

double hover_induced_velocity(double thrust_N, double air_density, double disk_radius_m) {
  if (thrust_N < 0.0) throw std::invalid_argument("hover_induced_velocity: thrust must be >= 0");
  if (!(air_density > 0.0) || !(disk_radius_m > 0.0))
    throw std::invalid_argument("hover_induced_velocity: rho and disk radius must be > 0");
  const double disk_area = M_PI * disk_radius_m * disk_radius_m;
  return std::sqrt(thrust_N / (2.0 * air_density * disk_area));
}

namespace {

double momentum_lhs(double x, double cross, double axial) {
  const double d = x - axial;
  return x * std::sqrt(cross * cross + d * d);
}

}  // namespace

double induced_velocity(double thrust_N, double freestream_mps, double alpha_rad,
                        double air_density, double disk_radius_m) {
  const double nu_h = hover_induced_velocity(thrust_N, air_density, disk_radius_m);
  if (nu_h == 0.0) return 0.0;
  if (freestream_mps < 0.0)
    throw std::invalid_argument("induced_velocity: freestream must be >= 0");
  if (freestream_mps == 0.0) return nu_h;

  const double target = nu_h * nu_h;
  const double cross = freestream_mps * std::abs(std::cos(alpha_rad));
  const double axial = freestream_mps * std::sin(alpha_rad);

  // Damped fixed point from the hover solution.
  double x = nu_h;
  bool converged = false;
  for (int i = 0; i < 200; ++i) {
    const double d = x - axial;
    const double denom = std::sqrt(cross * cross + d * d);
    if (denom <= 0.0) break;
    const double next = 0.5 * x + 0.5 * target / denom;
    if (std::abs(next - x) < 1e-14 * std::max(1.0, std::abs(next))) {
      x = next;
      converged = true;
      break;
    }
    x = next;
  }

  if (!converged || std::abs(momentum_lhs(x, cross, axial) - target) > 1e-12 * std::max(1.0, target)) {
    // Bisection on the monotone bracket [0, nu_h + nu_inf + 1].
    double lo = 0.0;
    double hi = nu_h + freestream_mps + 1.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (momentum_lhs(mid, cross, axial) < target)
        lo = mid;
      else
        hi = mid;
    }
    x = 0.5 * (lo + hi);
  }

  if (glauert_residual(x, thrust_N, freestream_mps, alpha_rad, air_density, disk_radius_m) > 1e-10) {
    std::ostringstream os;
    os << "induced_velocity: no convergence at f=" << thrust_N << " N, nu_inf="
       << freestream_mps << " m/s, alpha=" << alpha_rad << " rad";
    throw std::runtime_error(os.str());
  }
  return x;
}

double glauert_residual(double induced_mps, double thrust_N, double freestream_mps,
                        double alpha_rad, double air_density, double disk_radius_m) {
  const double nu_h = hover_induced_velocity(thrust_N, air_density, disk_radius_m);
  if (nu_h == 0.0) return std::abs(induced_mps);
  const double cross = freestream_mps * std::abs(std::cos(alpha_rad));
  const double d = induced_mps - freestream_mps * std::sin(alpha_rad);
  const double denom = std::sqrt(cross * cross + d * d);
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(induced_mps - nu_h * nu_h / denom);
}

double rotor_power(const RotorOperatingPoint& op, const EfficiencyChain& eff) {
  const double aero =
      op.thrust_N * (op.induced_mps - op.freestream_mps * std::sin(op.alpha_rad));
  return std::max(0.0, aero / eff.product());
}

double rotor_power_at(double thrust_N, double freestream_mps, double alpha_rad,
                      double air_density, double disk_radius_m, const EfficiencyChain& eff) {
  if (thrust_N == 0.0) return 0.0;
  RotorOperatingPoint op;
  op.thrust_N = thrust_N;
  op.freestream_mps = freestream_mps;
  op.alpha_rad = alpha_rad;
  op.induced_mps = induced_velocity(thrust_N, freestream_mps, alpha_rad, air_density, disk_radius_m);
  return rotor_power(op, eff);
}

double rotor_power_from_flow(double thrust_N, const Vec3& relative_wind,
                             const Vec3& thrust_dir, double air_density,
                             double disk_radius_m, const EfficiencyChain& eff) {
  if (thrust_N == 0.0) return 0.0;
  const double speed = relative_wind.norm();
  double alpha = 0.0;
  if (speed > 1e-12) {
    const double s = std::clamp(relative_wind.dot(thrust_dir) / speed, -1.0, 1.0);
    alpha = std::asin(s);
  }
  return rotor_power_at(thrust_N, speed, alpha, air_density, disk_radius_m, eff);
}

double vehicle_power_flying(double v_mps, double alpha_rad, std::span<const double> thrusts_N,
                            const VehicleParams& params, const Environment& env,
                            const EfficiencyChain& eff) {
  if (static_cast<int>(thrusts_N.size()) != params.rotor_count)
    throw std::invalid_argument("vehicle_power_flying: thrust list length != rotor count");
  double total = 0.0;
  for (double f : thrusts_N)
    total += rotor_power_at(f, v_mps, alpha_rad, env.air_density, params.disk_radius_m, eff);
  return total;
}

RotorLayout rotor_layout(const VehicleParams& params) {
  RotorLayout lay;
  lay.count = params.rotor_count;
  const double c = params.arm_length_m / std::sqrt(2.0);
  // Pair (x, y) footprints A..D; matches the allocation matrix sign pattern.
  const double px[4] = {+c, +c, -c, -c};
  const double py[4] = {-c, +c, +c, -c};
  const double yaw_upper[4] = {-1.0, +1.0, -1.0, +1.0};
  const double z_upper = (params.rotor_count == 8) ? 0.5 * params.rotor_height_m : 0.0;
  for (int i = 0; i < 4; ++i) {
    lay.position[i] = Vec3(px[i], py[i], z_upper);
    lay.thrust_dir[i] = Vec3(0.0, 0.0, 1.0);
    lay.yaw_coeff[i] = yaw_upper[i] * params.torque_coeff;
  }
  if (params.rotor_count == 8) {
    for (int i = 0; i < 4; ++i) {
      lay.position[4 + i] = Vec3(px[i], py[i], -0.5 * params.rotor_height_m);
      lay.thrust_dir[4 + i] = Vec3(0.0, 0.0, -1.0);
      lay.yaw_coeff[4 + i] = -yaw_upper[i] * params.torque_coeff;
    }
  }
  return lay;
}

double vehicle_power_rolling_phase_averaged(double v_mps, double pair_force_N,
                                            const VehicleParams& params,
                                            const Environment& env,
                                            const EfficiencyChain& eff,
                                            int phase_samples,
                                            bool uniform_freestream) {
  if (phase_samples < 1)
    throw std::invalid_argument("vehicle_power_rolling_phase_averaged: need >= 1 phase sample");
  if (params.rotor_count != 8)
    throw std::invalid_argument("vehicle_power_rolling_phase_averaged: rolling assembly has 8 rotors");
  const double q = std::abs(pair_force_N);
  if (q == 0.0) return 0.0;

  const RotorLayout lay = rotor_layout(params);
  // Pure +tau_y solution: pairs (A, B, C, D) = (-q, -q, +q, +q), so the lower
  // rotors of A/B and the upper rotors of C/D are active. The -tau_y case is
  // the mirror image and averages to the same power.
  const int active[4] = {4, 5, 2, 3};

  const double omega = v_mps / params.shell_radius_m;
  const Vec3 omega_vec(0.0, omega, 0.0);
  const double st = std::sin(env.slope_rad);
  const double ct = std::cos(env.slope_rad);
  const Vec3 travel(ct, 0.0, st);

  double sum = 0.0;
  for (int k = 0; k < phase_samples; ++k) {
    const double phase = 2.0 * M_PI * k / phase_samples;
    const Rotation r = rotation_about_y(phase);
    for (int idx : active) {
      const Vec3 dir = r * lay.thrust_dir[idx];
      Vec3 rotor_vel = v_mps * travel;
      if (!uniform_freestream) rotor_vel += omega_vec.cross(r * lay.position[idx]);
      const Vec3 wind = -rotor_vel;
      sum += rotor_power_from_flow(q, wind, dir, env.air_density, params.disk_radius_m, eff);
    }
  }
  return sum / phase_samples;
}

}  // namespace rollfly
