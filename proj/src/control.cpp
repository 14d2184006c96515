#include "rollfly/control.hpp"

#include <cmath>
#include <sstream>

namespace rollfly {

std::pair<Wrench, RateControllerState> pi_rate_control(const Vec3& omega_des,
                                                       const Vec3& omega_meas,
                                                       RateControllerState ctl, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("pi_rate_control: dt must be > 0");
  const Vec3 error = omega_des - omega_meas;
  const Vec3 prev = ctl.has_prev_error ? ctl.prev_error : error;
  Vec3 integral = ctl.integral + 0.5 * dt * (error + prev);
  for (int i = 0; i < 3; ++i)
    integral[i] = std::clamp(integral[i], -ctl.integral_limit, ctl.integral_limit);
  ctl.integral = integral;
  ctl.prev_error = error;
  ctl.has_prev_error = true;

  Wrench w;
  w.thrust_N = 0.0;  // pure torque by construction
  w.torque_Nm = ctl.kp.cwiseProduct(error) + ctl.ki.cwiseProduct(integral);
  return {w, ctl};
}

Eigen::Matrix4d allocation_matrix(const VehicleParams& params) {
  const double c = params.arm_length_m / std::sqrt(2.0);
  const double kt = params.torque_coeff;
  Eigen::Matrix4d m;
  m << 1.0, 1.0, 1.0, 1.0,
       -c, c, c, -c,
       -c, -c, c, c,
       -kt, kt, -kt, kt;
  return m;
}

PairForces allocate(const Wrench& wrench, const VehicleParams& params) {
  const Eigen::Matrix4d m = allocation_matrix(params);
  Eigen::Vector4d rhs(wrench.thrust_N, wrench.torque_Nm.x(), wrench.torque_Nm.y(),
                      wrench.torque_Nm.z());
  Eigen::Vector4d f = m.fullPivLu().solve(rhs);

  PairForces out;
  const double peak = f.cwiseAbs().maxCoeff();
  if (peak > params.rotor_thrust_max_N) {
    f *= params.rotor_thrust_max_N / peak;  // uniform scaling keeps the torque direction
    out.saturated = true;
  }
  out.a = f[0];
  out.b = f[1];
  out.c = f[2];
  out.d = f[3];
  return out;
}

RotorSpeeds pair_to_speeds(const PairForces& pair, double thrust_coeff) {
  if (!(thrust_coeff > 0.0)) throw std::invalid_argument("pair_to_speeds: k_t must be > 0");
  RotorSpeeds out;
  for (int p = 0; p < 4; ++p) {
    const double f = pair[p];
    if (f >= 0.0)
      out.n[p] = std::sqrt(f / thrust_coeff);
    else
      out.n[p + 4] = std::sqrt(-f / thrust_coeff);
  }
  return out;
}

QuadMix quad_mix(const Wrench& wrench, const VehicleParams& params) {
  const Eigen::Matrix4d m = allocation_matrix(params);
  Eigen::Vector4d rhs(wrench.thrust_N, wrench.torque_Nm.x(), wrench.torque_Nm.y(),
                      wrench.torque_Nm.z());
  Eigen::Vector4d f = m.fullPivLu().solve(rhs);
  QuadMix out;
  for (int i = 0; i < 4; ++i) {
    if (f[i] < 0.0) {
      f[i] = 0.0;
      out.clamped = true;
    }
    out.thrust_N[i] = std::min(f[i], params.rotor_thrust_max_N);
    if (f[i] > params.rotor_thrust_max_N) out.clamped = true;
  }
  return out;
}

Wrench flight_velocity_control(double vx_des, double z_ref, double z_ref_rate,
                               const RigidBodyState& state, FlightControllerState& ctl,
                               const VehicleParams& params, const Environment& env, double dt) {
  const double g = env.gravity_mps2;
  const double m = params.mass_kg;

  const double ev = vx_des - state.velocity.x();
  ctl.v_integral = std::clamp(ctl.v_integral + ev * dt, -10.0, 10.0);
  const double ax_cmd = ctl.kp_v * ev + ctl.ki_v * ctl.v_integral;

  const double ez = z_ref - state.position.z();
  ctl.z_integral = std::clamp(ctl.z_integral + ez * dt, -10.0, 10.0);
  const double az_cmd = ctl.kp_z * ez + ctl.kd_z * (z_ref_rate - state.velocity.z()) +
                        ctl.ki_z * ctl.z_integral;

  const Vec3 f_des(m * ax_cmd, 0.0, m * (az_cmd + g));
  const double tilt_des = std::atan2(f_des.x(), std::max(f_des.z(), 1e-9));
  if (std::abs(tilt_des) > ctl.max_tilt_rad) {
    std::ostringstream os;
    os << "flight_velocity_control: commanded tilt " << rad_to_deg(tilt_des)
       << " deg exceeds the 60 deg validity limit (vx_des=" << vx_des << " m/s)";
    throw InfeasibleError(os.str());
  }

  const double pitch = state.attitude.pitch_y();
  const double omega_y = state.body_rates.y();
  const double jyy = params.inertia(1, 1);

  Wrench w;
  w.thrust_N = f_des.norm();
  w.torque_Nm = Vec3(0.0, jyy * (ctl.kp_att * (tilt_des - pitch) - ctl.kd_att * omega_y), 0.0);
  return w;
}

}  // namespace rollfly
