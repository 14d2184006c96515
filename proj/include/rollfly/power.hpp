#pragma once

#include "rollfly/core.hpp"

#include <array>
#include <span>

namespace rollfly {

/// Sign convention for the rotor angle of attack, used by every function in
/// this header:
///
///   alpha > 0  — the freestream has a component along the thrust axis
///                (blowing up through the disk, descent-like; power drops and
///                eventually clamps to zero).
///   alpha < 0  — the freestream has a component opposite the thrust axis
///                (down through the disk, as in climb or forward-tilted
///                cruise; power grows by f * nu_inf * |sin alpha|).
///
/// Equivalently sin(alpha) = dot(u, t_hat) / |u| with u the air velocity
/// relative to the rotor and t_hat the thrust direction.
struct RotorOperatingPoint {
  double thrust_N = 0.0;
  double freestream_mps = 0.0;
  double alpha_rad = 0.0;
  double induced_mps = 0.0;
};

/// Momentum-theory hover induced velocity nu_h = sqrt(f / (2 rho pi r^2)).
double hover_induced_velocity(double thrust_N, double air_density, double disk_radius_m);

/// Forward-flight induced velocity: the root of
///   nu_i * sqrt((nu_inf cos a)^2 + (nu_i - nu_inf sin a)^2) = nu_h^2
/// (the inflow-consistent branch of the momentum relation in the convention
/// above). Damped fixed point with a bisection fallback; throws
/// std::runtime_error naming the operating point if the residual cannot be
/// driven below 1e-12.
double induced_velocity(double thrust_N, double freestream_mps, double alpha_rad,
                        double air_density, double disk_radius_m);

/// |nu_i - nu_h^2 / sqrt((nu_inf cos a)^2 + (nu_i - nu_inf sin a)^2)|.
double glauert_residual(double induced_mps, double thrust_N, double freestream_mps,
                        double alpha_rad, double air_density, double disk_radius_m);

/// Electrical rotor power P = f (nu_i - nu_inf sin a) / (eta_p eta_m eta_c),
/// clamped below at zero (no regeneration).
double rotor_power(const RotorOperatingPoint& op, const EfficiencyChain& eff);

/// Convenience: solve the induced velocity for (f, nu_inf, alpha) and return
/// the clamped electrical power.
double rotor_power_at(double thrust_N, double freestream_mps, double alpha_rad,
                      double air_density, double disk_radius_m, const EfficiencyChain& eff);

/// Rotor power from the relative-wind vector: nu_inf = |wind| and
/// sin(alpha) = dot(wind, thrust_dir)/|wind| per the convention above.
double rotor_power_from_flow(double thrust_N, const Vec3& relative_wind,
                             const Vec3& thrust_dir, double air_density,
                             double disk_radius_m, const EfficiencyChain& eff);

/// Total power of a translating multirotor: every rotor sees nu_inf = v and
/// the shared rotor-convention alpha.
double vehicle_power_flying(double v_mps, double alpha_rad, std::span<const double> thrusts_N,
                            const VehicleParams& params, const Environment& env,
                            const EfficiencyChain& eff);

/// Rotor geometry of the vehicle, in body coordinates. Rotors 0..3 thrust
/// along +z_B; for the docked pair rotors 4..7 sit mirrored below and thrust
/// along -z_B. Pairs are (0,4), (1,5), (2,6), (3,7).
struct RotorLayout {
  int count = 4;
  std::array<Vec3, 8> position{};
  std::array<Vec3, 8> thrust_dir{};
  std::array<double, 8> yaw_coeff{};  // reaction-torque coefficient, +/- k_tau
};

RotorLayout rotor_layout(const VehicleParams& params);

/// Average electrical power of the rolling assembly over one shell
/// revolution, sampled at `phase_samples` equally spaced roll phases.
/// `pair_force_N` is the common magnitude of the four pair forces of the
/// pure-torque solution (one rotor per pair active). Per-rotor freestream is
/// v x_hat + omega x rho_i with omega = v/l, unless `uniform_freestream` is
/// set, in which case all rotors see nu_inf = v (sensitivity variant).
double vehicle_power_rolling_phase_averaged(double v_mps, double pair_force_N,
                                            const VehicleParams& params,
                                            const Environment& env,
                                            const EfficiencyChain& eff,
                                            int phase_samples = 72,
                                            bool uniform_freestream = false);

}  // namespace rollfly
