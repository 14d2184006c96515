#pragma once

#include "rollfly/control.hpp"
#include "rollfly/core.hpp"
#include "rollfly/power.hpp"

#include <array>
#include <span>
#include <vector>

namespace rollfly {

enum class Mode { rolling, flying };

/// Execution policy for the grid sweeps. Both produce bit-identical results;
/// the serial path is the reference the parallel one is tested against.
enum class Exec { serial, parallel };

struct AnalysisOptions {
  int phase_samples = 72;
  bool uniform_freestream = false;  // sensitivity variant: all rotors see nu_inf = v
};

struct SteadyStateResult {
  Mode mode = Mode::rolling;
  double speed_mps = 0.0;
  double pitch_rad = 0.0;            // solved tilt (flying); 0 for rolling
  double torque_Nm = 0.0;            // rolling drive torque (signed)
  double thrust_N = 0.0;             // total thrust (flying)
  std::array<double, 8> rotor_thrusts_N{};
  double power_W = 0.0;
  double range_m = 0.0;              // v * E_batt / P
  bool feasible = true;
};

/// Force balance along the slope: tau/l = m g sin(theta) + C_rr m g cos(theta)
/// + drag(v) with the drag area phase-averaged over a shell revolution. Pair
/// force magnitude |tau|/(4c); power via the phase-averaged rotor model.
SteadyStateResult rolling_steady_state(double v_mps, double slope_rad, double crr,
                                       const VehicleParams& params, const Environment& env,
                                       const EfficiencyChain& eff,
                                       const AnalysisOptions& opt = {});

/// Constant ground-speed flight a fixed height above the slope (climb rate
/// v sin(theta)). Tilt and thrust solve the weight/drag/thrust balance with
/// the drag area evaluated at the solved tilt; infeasible when no tilt
/// solution exists below 60 deg.
SteadyStateResult flying_steady_state(double v_mps, double slope_rad,
                                      const VehicleParams& params, const Environment& env,
                                      const EfficiencyChain& eff,
                                      const AnalysisOptions& opt = {});

struct Optimum {
  double v_mps = 0.0;
  double range_m = 0.0;
};

/// Maximize range over v: 200-point log grid on [0.01, 20] m/s, then
/// golden-section refinement of the best bracket to 1e-4 m/s. Throws
/// InfeasibleError when no grid point is feasible.
Optimum optimal_velocity(Mode mode, double slope_rad, double crr, const VehicleParams& params,
                         const Environment& env, const EfficiencyChain& eff,
                         const AnalysisOptions& opt = {});

struct RangeCurve {
  Mode mode = Mode::rolling;
  double slope_rad = 0.0;
  double crr = 0.0;
  std::vector<SteadyStateResult> samples;
  Optimum optimum;
};

RangeCurve range_curve(Mode mode, double slope_rad, double crr, std::span<const double> v_grid,
                       const VehicleParams& params, const Environment& env,
                       const EfficiencyChain& eff, const AnalysisOptions& opt = {},
                       Exec exec = Exec::parallel);

struct AdvantageGrid {
  std::vector<double> slopes_rad;          // size n
  std::vector<double> crrs;                // size n
  std::vector<double> delta_range_m;       // row-major [slope][crr], R_roll - R_fly
  std::vector<double> roll_range_m;        // same layout
  std::vector<double> fly_range_m;
  std::vector<std::pair<double, double>> crossover;  // (slope_rad, crr) where delta = 0

  double delta(int slope_idx, int crr_idx) const {
    return delta_range_m[static_cast<size_t>(slope_idx) * crrs.size() + crr_idx];
  }
};

/// Range advantage of rolling over flying on an n x n (slope, C_rr) grid,
/// each cell evaluated at its own optimal velocities. The crossover polyline
/// interpolates the delta = 0 crossing along each constant-slope column.
/// Cells are pure-function evaluations merged in grid order, so serial and
/// parallel execution give identical results.
AdvantageGrid advantage_map(double slope_min_rad, double slope_max_rad, double crr_min,
                            double crr_max, int resolution, const VehicleParams& roll_params,
                            const VehicleParams& fly_params, const Environment& env,
                            const EfficiencyChain& eff, const AnalysisOptions& opt = {},
                            Exec exec = Exec::parallel);

/// Out-and-back survey disk: pi * (range/2)^2.
double coverage_area(double one_way_range_m);

/// Log-spaced default velocity grid used by the optimizer and the CLI.
std::vector<double> default_velocity_grid(int points = 200, double v_min = 0.01,
                                          double v_max = 20.0);

}  // namespace rollfly
