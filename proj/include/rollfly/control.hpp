#pragma once

#include "rollfly/core.hpp"
#include "rollfly/dynamics.hpp"

#include <array>
#include <utility>

namespace rollfly {

/// PI body-rate controller state. Gains are diagonal; the accumulator is the
/// clamped running integral of the rate error (trapezoidal).
struct RateControllerState {
  Vec3 kp = Vec3(0.05, 0.05, 0.05);        // N m s / rad
  Vec3 ki = Vec3(0.02, 0.02, 0.02);        // N m / rad
  double integral_limit = 0.5;             // rad, per axis
  Vec3 integral = Vec3::Zero();
  Vec3 prev_error = Vec3::Zero();
  bool has_prev_error = false;
};

/// Pure-torque rate tracking: tau = Kp e + Ki int(e), thrust exactly zero.
std::pair<Wrench, RateControllerState> pi_rate_control(const Vec3& omega_des,
                                                       const Vec3& omega_meas,
                                                       RateControllerState ctl, double dt);

/// The matrix M mapping pair forces (f_A..f_D) to (f_cmd, tau):
///   row 0:  1   1   1   1
///   row 1: -c   c   c  -c        c = a / sqrt(2)
///   row 2: -c  -c   c   c
///   row 3: -kt  kt -kt  kt
Eigen::Matrix4d allocation_matrix(const VehicleParams& params);

/// Signed per-pair forces; the sign selects which rotor of the opposite pair
/// is active. `saturated` is set when the raw solution exceeded the per-rotor
/// limit and the whole vector was scaled down uniformly.
struct PairForces {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  bool saturated = false;

  double operator[](int i) const {
    const double* v[4] = {&a, &b, &c, &d};
    return *v[i];
  }
};

/// Solve [f_cmd; tau] = M [f_A..f_D] for the pair forces.
PairForces allocate(const Wrench& wrench, const VehicleParams& params);

struct RotorSpeeds {
  std::array<double, 8> n{};  // rad/s, zero for absent rotors
};

/// Pair force -> rotor speeds: f >= 0 drives the first rotor of the pair at
/// sqrt(f/k_t), f < 0 the opposite one; the other rotor of the pair is off.
RotorSpeeds pair_to_speeds(const PairForces& pair, double thrust_coeff);

/// Per-rotor thrusts for the 4-rotor craft from a wrench (same M, but the
/// solution is the rotor thrusts themselves; negatives are clamped to zero
/// and reported).
struct QuadMix {
  std::array<double, 4> thrust_N{};
  bool clamped = false;
};
QuadMix quad_mix(const Wrench& wrench, const VehicleParams& params);

/// Minimal cascaded velocity/altitude/attitude loop for the flying craft,
/// planar (x-z). Velocity and altitude errors map to a desired thrust vector,
/// its direction to a pitch setpoint tracked by a PD attitude loop. At steady
/// state on flat ground tilt and thrust satisfy tan(a) = drag/(m g) and
/// T = sqrt((m g)^2 + drag^2).
struct FlightControllerState {
  double kp_v = 1.2;        // (m/s^2) per (m/s)
  double ki_v = 0.4;
  double kp_z = 2.0;        // (m/s^2) per m
  double kd_z = 2.8;
  double ki_z = 0.4;
  double kp_att = 80.0;     // (rad/s^2) per rad
  double kd_att = 18.0;
  double max_tilt_rad = deg_to_rad(60.0);
  double v_integral = 0.0;
  double z_integral = 0.0;
};

/// vx_des: horizontal ground-speed setpoint; z_ref / z_ref_rate: altitude
/// reference and feedforward rate. Throws InfeasibleError when the commanded
/// tilt exceeds the 60 deg model validity limit.
Wrench flight_velocity_control(double vx_des, double z_ref, double z_ref_rate,
                               const RigidBodyState& state, FlightControllerState& ctl,
                               const VehicleParams& params, const Environment& env, double dt);

/// Raised when a commanded or solved operating point leaves the model's
/// validity envelope (tilt > 60 deg, rotor saturation in steady state, ...).
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rollfly
