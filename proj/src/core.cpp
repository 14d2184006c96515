#include "rollfly/core.hpp"

#include <cmath>
#include <stdexcept>

namespace rollfly {

Rotation Rotation::operator*(const Rotation& rhs) const {
  Rotation out(m_ * rhs.m_);
  out.renormalize();
  return out;
}

double Rotation::orthonormality_error() const {
  const Mat3 err = m_.transpose() * m_ - Mat3::Identity();
  return err.cwiseAbs().maxCoeff();
}

void Rotation::renormalize() {
  // Gram-Schmidt on the columns; cheap and more than accurate enough for
  // matrices that are already near-orthonormal.
  Vec3 c0 = m_.col(0).normalized();
  Vec3 c1 = (m_.col(1) - c0 * c0.dot(m_.col(1))).normalized();
  Vec3 c2 = c0.cross(c1);
  m_.col(0) = c0;
  m_.col(1) = c1;
  m_.col(2) = c2;
}

Rotation rotation_about_y(double angle_rad) {
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  Mat3 m;
  m << c, 0.0, s,
       0.0, 1.0, 0.0,
       -s, 0.0, c;
  return Rotation(m);
}

Mat3 cylinder_inertia(double mass_kg, double radius_m, double width_m) {
  const double r2 = radius_m * radius_m;
  const double w2 = width_m * width_m;
  Mat3 j = Mat3::Zero();
  j(1, 1) = 0.5 * mass_kg * r2;                  // about the cylinder axis (y)
  j(0, 0) = j(2, 2) = mass_kg * (3.0 * r2 + w2) / 12.0;
  return j;
}

Mat3 box_inertia(double mass_kg, double lx, double ly, double lz) {
  Mat3 j = Mat3::Zero();
  j(0, 0) = mass_kg * (ly * ly + lz * lz) / 12.0;
  j(1, 1) = mass_kg * (lx * lx + lz * lz) / 12.0;
  j(2, 2) = mass_kg * (lx * lx + ly * ly) / 12.0;
  return j;
}

namespace {

VehicleParams base_params() {
  VehicleParams p;
  p.shell_radius_m = 0.2;
  p.shell_width_m = 0.4;
  p.arm_length_m = 0.14;
  p.thrust_coeff = 8.0 / (2500.0 * 2500.0);  // 8 N at 2500 rad/s
  p.torque_coeff = 0.016;
  p.disk_radius_m = 0.0762;                  // 6-inch propeller
  p.rotor_thrust_max_N = 8.0;
  return p;
}

Environment titan_env() {
  Environment e;
  e.gravity_mps2 = 1.352;
  e.air_density = 5.4;
  e.drag_coeff = 2.1;
  e.rolling_resistance = 0.01;
  e.slope_rad = 0.0;
  return e;
}

}  // namespace

PresetBundle preset(Preset p) {
  PresetBundle b;
  b.env = titan_env();
  b.eff = EfficiencyChain{0.6, 0.85, 0.95};
  b.params = base_params();
  switch (p) {
    case Preset::titan_roll:
      b.params.mass_kg = 1.6;
      b.params.rotor_count = 8;
      b.params.rotor_height_m = 0.16;
      b.params.battery_J = 1.74e6;
      b.params.inertia = cylinder_inertia(1.6, 0.2, 0.4);
      break;
    case Preset::titan_fly:
      b.params.mass_kg = 0.8;
      b.params.rotor_count = 4;
      b.params.rotor_height_m = 0.08;
      b.params.battery_J = 8.7e5;
      b.params.inertia = box_inertia(0.8, 0.4, 0.4, 0.08);
      break;
  }
  return b;
}

PresetBundle preset_by_name(std::string_view name) {
  if (name == "titan_roll") return preset(Preset::titan_roll);
  if (name == "titan_fly") return preset(Preset::titan_fly);
  throw std::invalid_argument("unknown preset '" + std::string(name) +
                              "' (expected titan_roll or titan_fly)");
}

std::vector<std::string> validate(const VehicleParams& p, const Environment& e) {
  std::vector<std::string> v;
  auto positive = [&v](double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) v.push_back(std::string(what) + " must be positive");
  };
  positive(p.mass_kg, "mass");
  positive(p.shell_radius_m, "shell radius");
  positive(p.shell_width_m, "shell width");
  positive(p.rotor_height_m, "rotor height");
  positive(p.arm_length_m, "arm length");
  positive(p.thrust_coeff, "thrust coefficient");
  positive(p.torque_coeff, "torque coefficient");
  positive(p.disk_radius_m, "disk radius");
  positive(p.battery_J, "battery energy");
  positive(p.rotor_thrust_max_N, "rotor thrust limit");
  if (p.rotor_count != 4 && p.rotor_count != 8)
    v.push_back("rotor count must be 4 or 8");
  if (!p.inertia.allFinite() || !(p.inertia.determinant() > 0.0) ||
      !(p.inertia(0, 0) > 0.0) || !(p.inertia(1, 1) > 0.0) || !(p.inertia(2, 2) > 0.0))
    v.push_back("inertia must be positive definite");
  if ((p.inertia - p.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    v.push_back("inertia must be symmetric");

  positive(e.gravity_mps2, "gravity");
  positive(e.air_density, "air density");
  if (!(e.drag_coeff >= 0.0) || !std::isfinite(e.drag_coeff))
    v.push_back("drag coefficient must be nonnegative");
  if (!(e.rolling_resistance >= 0.0 && e.rolling_resistance <= 1.0))
    v.push_back("C_rr out of range [0, 1]");
  if (!(e.slope_rad > -M_PI / 2.0 && e.slope_rad < M_PI / 2.0))
    v.push_back("slope out of range (-pi/2, pi/2)");
  return v;
}

}  // namespace rollfly
