#pragma once

#include "rollfly/analysis.hpp"
#include "rollfly/control.hpp"
#include "rollfly/core.hpp"
#include "rollfly/dynamics.hpp"
#include "rollfly/power.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rollfly {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TerrainFormat { ascii_grid, csv_profile };

/// Height field along the (planar) ground track. 2-D heightmaps are reduced
/// to the track through the grid's center row; lateral slope is ignored with
/// a one-time warning on stderr.
class Terrain {
 public:
  static Terrain flat(double slope_rad, double crr);
  static Terrain from_profile(std::vector<double> distance_m, std::vector<double> height_m,
                              double crr);

  double height(double x) const;
  double slope(double x) const;          // atan(dh/dx)
  Vec3 normal(double x) const;           // unit, in the x-z plane
  double crr() const { return crr_; }
  void set_crr(double crr) { crr_ = crr; }

 private:
  enum class Kind { flat, profile } kind_ = Kind::flat;
  double flat_slope_ = 0.0;
  std::vector<double> xs_, hs_;
  double crr_ = 0.01;

  friend Terrain load_terrain(const std::string&, TerrainFormat, double);
};

/// ascii_grid: `ncols`/`nrows`/`cellsize`/`nodata_value` headers followed by
/// row-major heights; csv_profile: distance_m,height_m with strictly
/// increasing distance. Throws ParseError with a line number on malformed
/// input or nodata cells on the traversal track.
Terrain load_terrain(const std::string& path, TerrainFormat format, double crr = 0.01);

enum class Integrator { rk4, semi_implicit_euler };
enum class SimMode { rolling, flying, coast };

struct Setpoint {
  double body_rate_radps = 0.0;  // rolling: omega_y setpoint
  double speed_mps = 0.0;        // flying: ground-speed setpoint
  double altitude_m = 0.0;       // flying: height above terrain
};

struct SimSegment {
  double until_s = 0.0;
  SimMode mode = SimMode::rolling;
  Setpoint setpoint;
};

struct SimConfig {
  VehicleParams params;
  Environment env;
  EfficiencyChain eff;
  Terrain terrain = Terrain::flat(0.0, 0.01);
  std::vector<SimSegment> segments;  // ordered by until_s; at least one
  double dt_s = 1e-3;                // (0, 0.01]
  double duration_s = 10.0;
  Integrator integrator = Integrator::rk4;
  int log_decimation = 100;
  RateControllerState rate_controller;
  FlightControllerState flight_controller;
  double initial_speed_mps = 0.0;
  std::optional<double> initial_altitude_m;  // airborne start when set
  double noise_stddev_radps = 0.0;
  std::uint32_t noise_seed = 1;
};

struct SimLogRow {
  double t_s = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double pitch_rad = 0.0;
  Vec3 body_rates = Vec3::Zero();
  double thrust_N = 0.0;
  Vec3 torque_Nm = Vec3::Zero();
  std::array<double, 8> rotor_speeds{};
  double power_W = 0.0;
  double energy_J = 0.0;       // cumulative electrical energy
  double distance_m = 0.0;     // cumulative path length
  double work_thrust_J = 0.0;  // cumulative actuator work on the body
  double work_drag_J = 0.0;    // cumulative (negative) drag work
  double work_rollres_J = 0.0; // cumulative (negative) rolling-resistance work
  double capture_loss_J = 0.0; // energy removed by touchdown no-slip captures
  bool contact = false;
};

struct SimLog {
  std::vector<SimLogRow> rows;
  double dt_s = 0.0;
};

/// One integration step at fixed rotor speeds; contact is resolved inside
/// every derivative evaluation, the attitude is re-orthonormalized, and the
/// rolling constraint is re-projected after the step. Aborts with a
/// diagnostic if the state turns non-finite.
RigidBodyState step(const RigidBodyState& state, const RotorSpeeds& speeds,
                    const Terrain& terrain, const VehicleParams& params, const Environment& env,
                    double dt, Integrator integrator);

/// Closed-loop run: setpoint -> controller -> allocation -> rotor speeds ->
/// dynamics, with trapezoidal power/energy accounting. Deterministic for a
/// fixed config (including the noise seed).
SimLog run(const SimConfig& config);

struct EnergyAudit {
  double duration_s = 0.0;
  double delta_kinetic_J = 0.0;
  double delta_potential_J = 0.0;
  double thrust_work_J = 0.0;
  double drag_dissipation_J = 0.0;       // <= 0
  double rolling_dissipation_J = 0.0;    // <= 0
  double capture_loss_J = 0.0;           // >= 0
  double closure_residual_J = 0.0;
  double closure_residual_rel = 0.0;
  double rotor_energy_J = 0.0;           // battery-side integral of rotor power
  double mean_power_W = 0.0;
};

/// Mechanical-energy bookkeeping over the log:
///   dKE + dPE = W_thrust + W_drag + W_rollres - capture_loss + residual.
EnergyAudit energy_audit(const SimLog& log, const VehicleParams& params, const Environment& env);

/// Mean electrical power over [t_from, t_to] from the cumulative energy column.
double mean_power(const SimLog& log, double t_from, double t_to);

/// Fixed column order, documented in the README.
void write_csv(const SimLog& log, std::ostream& os);

/// Per-rotor thrusts f_i = k_t n_i^2.
std::array<double, 8> thrusts_from_speeds(const RotorSpeeds& speeds, const VehicleParams& params);

/// Wrench produced by a set of rotor thrusts through the vehicle geometry.
Wrench wrench_from_thrusts(const std::array<double, 8>& thrusts, const VehicleParams& params);

/// Instantaneous electrical power of all rotors given the body state.
double instantaneous_power(const RigidBodyState& state, const std::array<double, 8>& thrusts,
                           const VehicleParams& params, const Environment& env,
                           const EfficiencyChain& eff);

/// JSON SimConfig loader; errors carry the path to the offending field.
/// Terrain file paths are resolved relative to the config file's directory.
SimConfig load_sim_config(const std::string& path);

}  // namespace rollfly
