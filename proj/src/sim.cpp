#include "rollfly/sim.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

namespace rollfly {

namespace {

constexpr double kGapTol = 1e-7;

double contact_gap(const RigidBodyState& s, const Terrain& terrain, double shell_radius) {
  const double x = s.position.x();
  const double slope = terrain.slope(x);
  return std::cos(slope) * (s.position.z() - terrain.height(x)) - shell_radius;
}

StateDerivative hybrid_derivatives(const RigidBodyState& s, const Wrench& w,
                                   const VehicleParams& p, const Environment& env,
                                   const Terrain& terrain) {
  if (contact_gap(s, terrain, p.shell_radius_m) <= kGapTol)
    return rolling_derivatives(s, w, p, env, terrain.normal(s.position.x()));
  return flying_derivatives(s, w, p, env);
}

RigidBodyState advance(const RigidBodyState& s, const StateDerivative& d, double h) {
  RigidBodyState out;
  out.position = s.position + h * d.velocity;
  out.velocity = s.velocity + h * d.acceleration;
  Rotation att(s.attitude.matrix() + h * d.attitude_rate);
  att.renormalize();
  out.attitude = att;
  out.body_rates = s.body_rates + h * d.body_rate_dot;
  return out;
}

template <typename Deriv>
RigidBodyState rk4_step(const RigidBodyState& s, double dt, const Deriv& f) {
  const StateDerivative k1 = f(s);
  const StateDerivative k2 = f(advance(s, k1, 0.5 * dt));
  const StateDerivative k3 = f(advance(s, k2, 0.5 * dt));
  const StateDerivative k4 = f(advance(s, k3, dt));

  RigidBodyState out;
  out.position = s.position + dt / 6.0 * (k1.velocity + 2.0 * k2.velocity + 2.0 * k3.velocity + k4.velocity);
  out.velocity = s.velocity + dt / 6.0 * (k1.acceleration + 2.0 * k2.acceleration +
                                          2.0 * k3.acceleration + k4.acceleration);
  Rotation att(s.attitude.matrix() + dt / 6.0 * (k1.attitude_rate + 2.0 * k2.attitude_rate +
                                                 2.0 * k3.attitude_rate + k4.attitude_rate));
  att.renormalize();
  out.attitude = att;
  out.body_rates = s.body_rates + dt / 6.0 * (k1.body_rate_dot + 2.0 * k2.body_rate_dot +
                                              2.0 * k3.body_rate_dot + k4.body_rate_dot);
  return out;
}

template <typename Deriv>
RigidBodyState semi_implicit_step(const RigidBodyState& s, double dt, const Deriv& f) {
  const StateDerivative d = f(s);
  RigidBodyState out;
  out.velocity = s.velocity + dt * d.acceleration;
  out.position = s.position + dt * out.velocity;
  out.body_rates = s.body_rates + dt * d.body_rate_dot;
  const double angle = out.body_rates.norm() * dt;
  Rotation att = s.attitude;
  if (angle > 0.0) {
    const Eigen::AngleAxisd rot(angle, out.body_rates.normalized());
    att = Rotation(s.attitude.matrix() * rot.toRotationMatrix());
    att.renormalize();
  }
  out.attitude = att;
  return out;
}

struct ContactProjection {
  bool contact = false;
  double capture_loss_J = 0.0;
};

/// Keeps a contacting state exactly on the constraint manifold: shell on the
/// surface, zero normal velocity, tangential velocity = l * omega_y. Fresh
/// touchdowns get an angular-momentum-conserving no-slip capture about the
/// contact line before the velocity is reconciled.
ContactProjection project_contact(RigidBodyState& s, const Terrain& terrain,
                                  const VehicleParams& p, const Environment& env,
                                  const Wrench& w, bool was_contact) {
  ContactProjection out;
  const double gap = contact_gap(s, terrain, p.shell_radius_m);
  if (gap > kGapTol) return out;  // airborne

  const double x = s.position.x();
  const Vec3 n = terrain.normal(x);
  const Vec3 t = Vec3::UnitY().cross(n);

  if (!was_contact) {
    // Touchdown: inelastic normal capture plus no-slip spin-up.
    const double m = p.mass_kg;
    const double l = p.shell_radius_m;
    const double jyy = p.inertia(1, 1);
    const double vt = s.velocity.dot(t);
    const double w_y = s.body_rates.y();
    const double ke_before = 0.5 * m * s.velocity.squaredNorm() + 0.5 * jyy * w_y * w_y;
    const double w_new = (jyy * w_y + m * l * vt) / (jyy + m * l * l);
    s.body_rates = Vec3(s.body_rates.x(), w_new, s.body_rates.z());
    s.velocity = l * w_new * t + s.velocity.y() * Vec3::UnitY();
    const double ke_after =
        0.5 * m * s.velocity.squaredNorm() + 0.5 * jyy * w_new * w_new;
    out.capture_loss_J = std::max(0.0, ke_before - ke_after);
  }

  // Would the surface have to pull to keep contact? Then release instead.
  const ContactInfo c = contact_reaction(s, w, p, env, n);
  if (!c.in_contact && gap >= -kGapTol) {
    out.contact = false;
    return out;
  }

  const double slope = terrain.slope(x);
  s.position.z() = terrain.height(x) + p.shell_radius_m / std::cos(slope);
  const double vt = p.shell_radius_m * s.body_rates.y();
  s.velocity = vt * t + s.velocity.y() * Vec3::UnitY();
  out.contact = true;
  return out;
}

void check_finite(const RigidBodyState& s, double t) {
  if (s.position.allFinite() && s.velocity.allFinite() && s.body_rates.allFinite() &&
      s.attitude.matrix().allFinite())
    return;
  std::ostringstream os;
  os << "simulation state became non-finite at t=" << t << " s (pos=" << s.position.transpose()
     << ", vel=" << s.velocity.transpose() << ")";
  throw std::runtime_error(os.str());
}

}  // namespace

std::array<double, 8> thrusts_from_speeds(const RotorSpeeds& speeds, const VehicleParams& params) {
  std::array<double, 8> f{};
  for (int i = 0; i < params.rotor_count; ++i)
    f[i] = params.thrust_coeff * speeds.n[i] * speeds.n[i];
  return f;
}

Wrench wrench_from_thrusts(const std::array<double, 8>& thrusts, const VehicleParams& params) {
  const RotorLayout lay = rotor_layout(params);
  Wrench w;
  Vec3 torque = Vec3::Zero();
  double yaw = 0.0;
  for (int i = 0; i < lay.count; ++i) {
    w.thrust_N += thrusts[i] * lay.thrust_dir[i].z();
    torque += lay.position[i].cross(thrusts[i] * lay.thrust_dir[i]);
    yaw += lay.yaw_coeff[i] * thrusts[i];
  }
  torque.z() += yaw;
  w.torque_Nm = torque;
  return w;
}

double instantaneous_power(const RigidBodyState& state, const std::array<double, 8>& thrusts,
                           const VehicleParams& params, const Environment& env,
                           const EfficiencyChain& eff) {
  const RotorLayout lay = rotor_layout(params);
  const Vec3 omega_world = state.attitude * state.body_rates;
  double total = 0.0;
  for (int i = 0; i < lay.count; ++i) {
    if (thrusts[i] == 0.0) continue;
    const Vec3 rotor_pos = state.attitude * lay.position[i];
    const Vec3 rotor_vel = state.velocity + omega_world.cross(rotor_pos);
    const Vec3 dir = state.attitude * lay.thrust_dir[i];
    total += rotor_power_from_flow(thrusts[i], -rotor_vel, dir, env.air_density,
                                   params.disk_radius_m, eff);
  }
  return total;
}

RigidBodyState step(const RigidBodyState& state, const RotorSpeeds& speeds,
                    const Terrain& terrain, const VehicleParams& params, const Environment& env,
                    double dt, Integrator integrator) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  Environment local = env;
  local.rolling_resistance = terrain.crr();

  const Wrench w = wrench_from_thrusts(thrusts_from_speeds(speeds, params), params);
  const bool was_contact = contact_gap(state, terrain, params.shell_radius_m) <= kGapTol;
  const auto deriv = [&](const RigidBodyState& s) {
    return hybrid_derivatives(s, w, params, local, terrain);
  };

  RigidBodyState next = integrator == Integrator::rk4 ? rk4_step(state, dt, deriv)
                                                      : semi_implicit_step(state, dt, deriv);
  project_contact(next, terrain, params, local, w, was_contact);
  check_finite(next, dt);
  return next;
}

namespace {

const SimSegment& segment_at(const SimConfig& cfg, double t) {
  for (const auto& seg : cfg.segments)
    if (t < seg.until_s) return seg;
  return cfg.segments.back();
}

void validate_config(const SimConfig& cfg) {
  if (cfg.segments.empty()) throw std::invalid_argument("sim config: at least one segment required");
  if (!(cfg.dt_s > 0.0 && cfg.dt_s <= 0.01))
    throw std::invalid_argument("sim config: dt must be in (0, 0.01] s");
  if (!(cfg.duration_s > 0.0)) throw std::invalid_argument("sim config: duration must be > 0");
  if (cfg.log_decimation < 1) throw std::invalid_argument("sim config: log decimation must be >= 1");
  const auto violations = validate(cfg.params, cfg.env);
  if (!violations.empty())
    throw std::invalid_argument("sim config: invalid parameters: " + violations.front());
}

}  // namespace

SimLog run(const SimConfig& cfg) {
  validate_config(cfg);

  Environment env = cfg.env;
  env.rolling_resistance = cfg.terrain.crr();
  const VehicleParams& p = cfg.params;

  RigidBodyState state;
  const SimSegment& first = cfg.segments.front();
  bool contact;
  if (first.mode == SimMode::flying || cfg.initial_altitude_m.has_value()) {
    const double alt = cfg.initial_altitude_m.value_or(first.setpoint.altitude_m);
    state.position = Vec3(0.0, 0.0, cfg.terrain.height(0.0) + alt);
    state.velocity = Vec3(cfg.initial_speed_mps, 0.0, 0.0);
    contact = false;
  } else {
    const double slope = cfg.terrain.slope(0.0);
    state.position = Vec3(0.0, 0.0, cfg.terrain.height(0.0) + p.shell_radius_m / std::cos(slope));
    const Vec3 t = Vec3::UnitY().cross(cfg.terrain.normal(0.0));
    const double w0 = cfg.initial_speed_mps / p.shell_radius_m;
    state.body_rates = Vec3(0.0, w0, 0.0);
    state.velocity = cfg.initial_speed_mps * t;
    contact = true;
  }

  RateControllerState rate_ctl = cfg.rate_controller;
  FlightControllerState flight_ctl = cfg.flight_controller;
  std::mt19937 rng(cfg.noise_seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  const int steps = static_cast<int>(std::llround(cfg.duration_s / cfg.dt_s));
  SimLog log;
  log.dt_s = cfg.dt_s;
  log.rows.reserve(static_cast<size_t>(steps / cfg.log_decimation) + 2);

  double energy = 0.0, distance = 0.0;
  double work_thrust = 0.0, work_drag = 0.0, work_roll = 0.0, capture_loss = 0.0;
  double prev_power = 0.0, prev_speed = 0.0;
  double prev_w_thrust = 0.0, prev_w_drag = 0.0, prev_w_roll = 0.0;
  bool have_prev_rates = false;

  for (int k = 0; k <= steps; ++k) {
    const double t = k * cfg.dt_s;
    const SimSegment& seg = segment_at(cfg, t);

    // Controller -> rotor speeds.
    RotorSpeeds speeds;
    Wrench cmd;
    switch (seg.mode) {
      case SimMode::rolling: {
        Vec3 omega_meas = state.body_rates;
        if (cfg.noise_stddev_radps > 0.0)
          omega_meas += cfg.noise_stddev_radps * Vec3(noise(rng), noise(rng), noise(rng));
        auto [w, next_ctl] = pi_rate_control(Vec3(0.0, seg.setpoint.body_rate_radps, 0.0),
                                             omega_meas, rate_ctl, cfg.dt_s);
        rate_ctl = next_ctl;
        cmd = w;
        speeds = pair_to_speeds(allocate(w, p), p.thrust_coeff);
        break;
      }
      case SimMode::flying: {
        const double x = state.position.x();
        const double slope = cfg.terrain.slope(x);
        const double z_ref = cfg.terrain.height(x) + seg.setpoint.altitude_m;
        const double vx_des = seg.setpoint.speed_mps * std::cos(slope);
        const double z_rate_ref = state.velocity.x() * std::tan(slope);
        cmd = flight_velocity_control(vx_des, z_ref, z_rate_ref, state, flight_ctl, p, env,
                                      cfg.dt_s);
        const QuadMix mix = quad_mix(cmd, p);
        for (int i = 0; i < 4; ++i) speeds.n[i] = std::sqrt(mix.thrust_N[i] / p.thrust_coeff);
        break;
      }
      case SimMode::coast:
        break;  // rotors off
    }

    const std::array<double, 8> thrusts = thrusts_from_speeds(speeds, p);
    const Wrench w_actual = wrench_from_thrusts(thrusts, p);

    // Diagnostics and work rates at the step start.
    const double power = instantaneous_power(state, thrusts, p, env, cfg.eff);
    const Vec3 thrust_world = state.attitude * Vec3(0.0, 0.0, w_actual.thrust_N);
    const double w_thrust_rate =
        thrust_world.dot(state.velocity) + w_actual.torque_Nm.dot(state.body_rates);
    const Vec3 drag = drag_force(state.velocity, pitch_relative_to_velocity(state), p, env);
    const double w_drag_rate = drag.dot(state.velocity);
    double w_roll_rate = 0.0;
    if (contact) {
      const ContactInfo c = contact_reaction(state, w_actual, p, env,
                                             cfg.terrain.normal(state.position.x()));
      if (c.in_contact)
        w_roll_rate = rolling_resistance_torque(c, p, env, state.body_rates.y()).y() *
                      state.body_rates.y();
    }
    const double speed = state.velocity.norm();

    if (have_prev_rates) {
      energy += 0.5 * cfg.dt_s * (prev_power + power);
      distance += 0.5 * cfg.dt_s * (prev_speed + speed);
      work_thrust += 0.5 * cfg.dt_s * (prev_w_thrust + w_thrust_rate);
      work_drag += 0.5 * cfg.dt_s * (prev_w_drag + w_drag_rate);
      work_roll += 0.5 * cfg.dt_s * (prev_w_roll + w_roll_rate);
    }
    prev_power = power;
    prev_speed = speed;
    prev_w_thrust = w_thrust_rate;
    prev_w_drag = w_drag_rate;
    prev_w_roll = w_roll_rate;
    have_prev_rates = true;

    if (k % cfg.log_decimation == 0 || k == steps) {
      SimLogRow row;
      row.t_s = t;
      row.position = state.position;
      row.velocity = state.velocity;
      row.pitch_rad = state.attitude.pitch_y();
      row.body_rates = state.body_rates;
      row.thrust_N = w_actual.thrust_N;
      row.torque_Nm = w_actual.torque_Nm;
      row.rotor_speeds = speeds.n;
      row.power_W = power;
      row.energy_J = energy;
      row.distance_m = distance;
      row.work_thrust_J = work_thrust;
      row.work_drag_J = work_drag;
      row.work_rollres_J = work_roll;
      row.capture_loss_J = capture_loss;
      row.contact = contact;
      log.rows.push_back(row);
    }
    if (k == steps) break;

    // Integrate one step.
    Environment local = env;
    const auto deriv = [&](const RigidBodyState& s) {
      return hybrid_derivatives(s, w_actual, p, local, cfg.terrain);
    };
    state = cfg.integrator == Integrator::rk4 ? rk4_step(state, cfg.dt_s, deriv)
                                              : semi_implicit_step(state, cfg.dt_s, deriv);
    const ContactProjection proj =
        project_contact(state, cfg.terrain, p, local, w_actual, contact);
    contact = proj.contact;
    capture_loss += proj.capture_loss_J;
    check_finite(state, t + cfg.dt_s);
  }
  return log;
}

EnergyAudit energy_audit(const SimLog& log, const VehicleParams& params, const Environment& env) {
  if (log.rows.empty()) throw std::invalid_argument("energy_audit: empty log");
  const SimLogRow& a = log.rows.front();
  const SimLogRow& b = log.rows.back();

  const auto kinetic = [&](const SimLogRow& r) {
    return 0.5 * params.mass_kg * r.velocity.squaredNorm() +
           0.5 * r.body_rates.dot(params.inertia * r.body_rates);
  };
  const auto potential = [&](const SimLogRow& r) {
    return params.mass_kg * env.gravity_mps2 * r.position.z();
  };

  EnergyAudit audit;
  audit.duration_s = b.t_s - a.t_s;
  audit.delta_kinetic_J = kinetic(b) - kinetic(a);
  audit.delta_potential_J = potential(b) - potential(a);
  audit.thrust_work_J = b.work_thrust_J - a.work_thrust_J;
  audit.drag_dissipation_J = b.work_drag_J - a.work_drag_J;
  audit.rolling_dissipation_J = b.work_rollres_J - a.work_rollres_J;
  audit.capture_loss_J = b.capture_loss_J - a.capture_loss_J;
  audit.rotor_energy_J = b.energy_J - a.energy_J;
  audit.mean_power_W = audit.duration_s > 0.0 ? audit.rotor_energy_J / audit.duration_s : 0.0;

  audit.closure_residual_J = (audit.delta_kinetic_J + audit.delta_potential_J) -
                             (audit.thrust_work_J + audit.drag_dissipation_J +
                              audit.rolling_dissipation_J - audit.capture_loss_J);
  const double scale = std::max({std::abs(kinetic(a) + potential(a)),
                                 std::abs(audit.delta_kinetic_J) + std::abs(audit.delta_potential_J),
                                 std::abs(audit.thrust_work_J) + std::abs(audit.drag_dissipation_J) +
                                     std::abs(audit.rolling_dissipation_J),
                                 1e-9});
  audit.closure_residual_rel = std::abs(audit.closure_residual_J) / scale;
  return audit;
}

double mean_power(const SimLog& log, double t_from, double t_to) {
  const SimLogRow* first = nullptr;
  const SimLogRow* last = nullptr;
  for (const auto& r : log.rows) {
    if (r.t_s >= t_from && !first) first = &r;
    if (r.t_s <= t_to) last = &r;
  }
  if (!first || !last || !(last->t_s > first->t_s))
    throw std::invalid_argument("mean_power: window contains fewer than two samples");
  return (last->energy_J - first->energy_J) / (last->t_s - first->t_s);
}

void write_csv(const SimLog& log, std::ostream& os) {
  os << "t_s,x_m,y_m,z_m,vx_mps,vy_mps,vz_mps,pitch_rad,wx_radps,wy_radps,wz_radps,"
        "fcmd_N,taux_Nm,tauy_Nm,tauz_Nm,"
        "n1_radps,n2_radps,n3_radps,n4_radps,n5_radps,n6_radps,n7_radps,n8_radps,"
        "power_W,energy_J,distance_m,work_thrust_J,work_drag_J,work_rollres_J,"
        "capture_loss_J,contact\n";
  char buf[64];
  const auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.12g%c", v, sep);
    os << buf;
  };
  for (const auto& r : log.rows) {
    put(r.t_s, ',');
    put(r.position.x(), ',');
    put(r.position.y(), ',');
    put(r.position.z(), ',');
    put(r.velocity.x(), ',');
    put(r.velocity.y(), ',');
    put(r.velocity.z(), ',');
    put(r.pitch_rad, ',');
    put(r.body_rates.x(), ',');
    put(r.body_rates.y(), ',');
    put(r.body_rates.z(), ',');
    put(r.thrust_N, ',');
    put(r.torque_Nm.x(), ',');
    put(r.torque_Nm.y(), ',');
    put(r.torque_Nm.z(), ',');
    for (double n : r.rotor_speeds) put(n, ',');
    put(r.power_W, ',');
    put(r.energy_J, ',');
    put(r.distance_m, ',');
    put(r.work_thrust_J, ',');
    put(r.work_drag_J, ',');
    put(r.work_rollres_J, ',');
    put(r.capture_loss_J, ',');
    os << (r.contact ? 1 : 0) << '\n';
  }
}

}  // namespace rollfly
