#pragma once

#include "rollfly/core.hpp"

namespace rollfly {

/// Inertial frame: z up, gravity -g z_hat. Rolling is planar: travel in the
/// x-z plane, rotation about y, the cylinder axis parallel to terrain y.
struct RigidBodyState {
  Vec3 position = Vec3::Zero();    // inertial [m]
  Vec3 velocity = Vec3::Zero();    // inertial [m/s]
  Rotation attitude;               // body -> inertial
  Vec3 body_rates = Vec3::Zero();  // body frame [rad/s]
};

struct Wrench {
  double thrust_N = 0.0;           // collective thrust along body z
  Vec3 torque_Nm = Vec3::Zero();   // body frame
};

struct ContactInfo {
  Vec3 normal = Vec3(0.0, 0.0, 1.0);  // terrain plane normal, inertial, unit
  Vec3 reaction = Vec3::Zero();       // reaction force on the body, inertial [N]
  bool in_contact = false;
};

struct StateDerivative {
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  Mat3 attitude_rate = Mat3::Zero();
  Vec3 body_rate_dot = Vec3::Zero();
};

/// Frontal area of the rectangular base projected orthogonal to the motion,
/// A = (h |cos a| + 2 l |sin a|) w. Periodic in a with period pi.
double aerodynamic_area(double pitch_rad, const VehicleParams& params);

/// Quadratic drag -0.5 C_d rho A(pitch) |v| v, applied at the CoM.
Vec3 drag_force(const Vec3& velocity, double pitch_rad, const VehicleParams& params,
                const Environment& env);

/// Rolling-resistance torque (0, -sign(omega_y) C_rr (r.n) l, 0), body frame.
/// Dissipative: opposes the roll rate, zero at zero normal load or at rest.
Vec3 rolling_resistance_torque(const ContactInfo& contact, const VehicleParams& params,
                               const Environment& env, double omega_y);

/// Reaction force satisfying no-penetration (zero normal acceleration) and
/// no-slip (tangential acceleration = l * omega_dot_y) simultaneously with
/// the rigid-body equations. Requires a principal-axis (diagonal) inertia.
/// A negative normal component means liftoff: in_contact=false, zero reaction.
ContactInfo contact_reaction(const RigidBodyState& state, const Wrench& wrench,
                             const VehicleParams& params, const Environment& env,
                             const Vec3& terrain_normal);

/// Newton-Euler derivatives with an explicit contact (pass a default-constructed
/// ContactInfo for free flight). Exposed so the rolling -> flying reduction is
/// literally the same code path with r = 0.
StateDerivative derivatives_with_contact(const RigidBodyState& state, const Wrench& wrench,
                                         const VehicleParams& params, const Environment& env,
                                         const ContactInfo& contact);

/// Rolling equations of motion: resolves the contact against `terrain_normal`
/// and applies reaction, contact moment and rolling resistance. Falls back to
/// the flying equations when the contact lifts off.
StateDerivative rolling_derivatives(const RigidBodyState& state, const Wrench& wrench,
                                    const VehicleParams& params, const Environment& env,
                                    const Vec3& terrain_normal);

/// Free-flight special case: r = 0 and zero rolling-resistance torque.
StateDerivative flying_derivatives(const RigidBodyState& state, const Wrench& wrench,
                                   const VehicleParams& params, const Environment& env);

/// Pitch of the body relative to the velocity direction in the x-z plane;
/// this is the angle that enters the projected-area drag model. Falls back
/// to the raw pitch when the speed is (numerically) zero.
double pitch_relative_to_velocity(const RigidBodyState& state);

}  // namespace rollfly
