#include "rollfly/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace rollfly {

namespace {

Mat3 skew(const Vec3& w) {
  Mat3 s;
  s << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return s;
}

double signum(double x) { return (x > 0.0) - (x < 0.0); }

/// Thrust rotated to inertial, minus weight, plus drag. Everything except the
/// contact reaction.
Vec3 external_force(const RigidBodyState& state, const Wrench& wrench,
                    const VehicleParams& params, const Environment& env) {
  const Vec3 thrust = state.attitude * Vec3(0.0, 0.0, wrench.thrust_N);
  const Vec3 weight(0.0, 0.0, -params.mass_kg * env.gravity_mps2);
  const Vec3 drag = drag_force(state.velocity, pitch_relative_to_velocity(state), params, env);
  return thrust + weight + drag;
}

}  // namespace

double pitch_relative_to_velocity(const RigidBodyState& state) {
  const double pitch = state.attitude.pitch_y();
  const double vx = state.velocity.x();
  const double vz = state.velocity.z();
  if (vx * vx + vz * vz < 1e-24) return pitch;
  return pitch - std::atan2(vz, vx);
}

double aerodynamic_area(double pitch_rad, const VehicleParams& params) {
  return (params.rotor_height_m * std::abs(std::cos(pitch_rad)) +
          2.0 * params.shell_radius_m * std::abs(std::sin(pitch_rad))) *
         params.shell_width_m;
}

Vec3 drag_force(const Vec3& velocity, double pitch_rad, const VehicleParams& params,
                const Environment& env) {
  const double speed = velocity.norm();
  if (speed == 0.0) return Vec3::Zero();
  const double area = aerodynamic_area(pitch_rad, params);
  return -0.5 * env.drag_coeff * env.air_density * area * speed * velocity;
}

Vec3 rolling_resistance_torque(const ContactInfo& contact, const VehicleParams& params,
                               const Environment& env, double omega_y) {
  if (!contact.in_contact) return Vec3::Zero();
  const double load = contact.reaction.dot(contact.normal);
  return Vec3(0.0,
              -signum(omega_y) * env.rolling_resistance * load * params.shell_radius_m,
              0.0);
}

ContactInfo contact_reaction(const RigidBodyState& state, const Wrench& wrench,
                             const VehicleParams& params, const Environment& env,
                             const Vec3& terrain_normal) {
  const Mat3& j = params.inertia;
  if (std::abs(j(0, 1)) + std::abs(j(0, 2)) + std::abs(j(1, 2)) > 1e-9)
    throw std::invalid_argument("contact_reaction: planar contact solve needs diagonal inertia");

  ContactInfo out;
  out.normal = terrain_normal.normalized();
  const Vec3 n = out.normal;
  const Vec3 t = Vec3::UnitY().cross(n);  // travel direction in the x-z plane

  const Vec3 f_ext = external_force(state, wrench, params, env);

  // No penetration: (f_ext + r).n = 0.
  const double r_n = -f_ext.dot(n);
  if (r_n < 0.0) {
    out.in_contact = false;
    return out;  // liftoff: the plane cannot pull
  }

  // Rolling resistance needs the normal load, which is independent of r_t.
  ContactInfo normal_only;
  normal_only.normal = n;
  normal_only.reaction = r_n * n;
  normal_only.in_contact = true;
  const double tau_roll_y =
      rolling_resistance_torque(normal_only, params, env, state.body_rates.y()).y();

  // No slip: xdd.t = l * omega_dot_y, with the contact moment -l R^T (n x r)
  // contributing -l r_t about y. Solving both constraints for r_t:
  const double m = params.mass_kg;
  const double l = params.shell_radius_m;
  const double jyy = j(1, 1);
  const double f_t = f_ext.dot(t);
  const double tau_y = wrench.torque_Nm.y();
  const double r_t = (m * l * (tau_y + tau_roll_y) - jyy * f_t) / (jyy + m * l * l);

  out.reaction = r_n * n + r_t * t;
  out.in_contact = true;
  return out;
}

StateDerivative derivatives_with_contact(const RigidBodyState& state, const Wrench& wrench,
                                         const VehicleParams& params, const Environment& env,
                                         const ContactInfo& contact) {
  StateDerivative d;
  d.velocity = state.velocity;

  const Vec3 f_ext = external_force(state, wrench, params, env);
  const Vec3 reaction = contact.in_contact ? contact.reaction : Vec3::Zero();
  d.acceleration = (f_ext + reaction) / params.mass_kg;

  const Vec3 omega = state.body_rates;
  Vec3 torque = wrench.torque_Nm - omega.cross(params.inertia * omega);
  if (contact.in_contact) {
    const double l = params.shell_radius_m;
    torque -= l * (state.attitude.transposed() * contact.normal.cross(reaction));
    torque += rolling_resistance_torque(contact, params, env, omega.y());
  }
  d.body_rate_dot = params.inertia.ldlt().solve(torque);
  d.attitude_rate = state.attitude.matrix() * skew(omega);
  return d;
}

StateDerivative rolling_derivatives(const RigidBodyState& state, const Wrench& wrench,
                                    const VehicleParams& params, const Environment& env,
                                    const Vec3& terrain_normal) {
  const ContactInfo contact = contact_reaction(state, wrench, params, env, terrain_normal);
  return derivatives_with_contact(state, wrench, params, env, contact);
}

StateDerivative flying_derivatives(const RigidBodyState& state, const Wrench& wrench,
                                   const VehicleParams& params, const Environment& env) {
  return derivatives_with_contact(state, wrench, params, env, ContactInfo{});
}

}  // namespace rollfly
