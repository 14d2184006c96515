#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace rollfly {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Proper rotation (body -> inertial). Composition re-orthonormalizes the
/// product with a Gram-Schmidt pass so long chains (1e6+ composes) stay
/// orthonormal well inside the 1e-9 budget.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}
  explicit Rotation(const Mat3& m) : m_(m) {}

  static Rotation identity() { return Rotation(); }

  const Mat3& matrix() const { return m_; }

  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  Rotation operator*(const Rotation& rhs) const;

  Rotation transposed() const { return Rotation(m_.transpose()); }

  /// Pitch about the inertial/body y axis (planar attitude), in radians.
  double pitch_y() const { return std::atan2(m_(0, 2), m_(2, 2)); }

  /// max|R^T R - I|, 0 for a perfectly orthonormal matrix.
  double orthonormality_error() const;

  void renormalize();

 private:
  Mat3 m_;
};

Rotation rotation_about_y(double angle_rad);

struct VehicleParams {
  double mass_kg = 0.0;
  Mat3 inertia = Mat3::Identity();   // kg m^2, principal axes expected
  double shell_radius_m = 0.0;       // cylinder radius l
  double shell_width_m = 0.0;        // cylinder width w
  double rotor_height_m = 0.0;       // rotor plane separation h
  double arm_length_m = 0.0;         // rotor arm a
  double thrust_coeff = 0.0;         // k_t, f_i = k_t n_i^2  [N s^2/rad^2]
  double torque_coeff = 0.0;         // k_tau, tau_i = k_tau f_i  [m]
  int rotor_count = 4;               // 4 = single agent, 8 = docked pair
  double disk_radius_m = 0.0;        // rotor disk radius (induced-velocity model)
  double battery_J = 0.0;
  double rotor_thrust_max_N = 0.0;
};

struct Environment {
  double gravity_mps2 = 9.81;
  double air_density = 1.225;        // rho [kg/m^3]
  double drag_coeff = 1.0;           // C_d
  double rolling_resistance = 0.0;   // C_rr
  double slope_rad = 0.0;            // terrain slope theta
};

struct EfficiencyChain {
  double propeller = 0.6;
  double motor = 0.85;
  double controller = 0.95;

  double product() const { return propeller * motor * controller; }
};

enum class Preset { titan_roll, titan_fly };

struct PresetBundle {
  VehicleParams params;
  Environment env;
  EfficiencyChain eff;
};

/// Titan presets: docked two-agent roller (8 rotors) and single flyer (4 rotors).
PresetBundle preset(Preset p);

/// Throws std::invalid_argument for an unknown name ("titan_roll"/"titan_fly").
PresetBundle preset_by_name(std::string_view name);

/// Inertia of a uniform solid cylinder, axis along body y.
Mat3 cylinder_inertia(double mass_kg, double radius_m, double width_m);

/// Inertia of a uniform solid box with side lengths (lx, ly, lz).
Mat3 box_inertia(double mass_kg, double lx, double ly, double lz);

/// Returns every violated invariant, one human-readable message per field.
/// Empty result means the pair is valid. Violations are data, not errors.
std::vector<std::string> validate(const VehicleParams& params, const Environment& env);

inline double deg_to_rad(double deg) { return deg * M_PI / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / M_PI; }

}  // namespace rollfly
