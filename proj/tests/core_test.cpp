#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rollfly/core.hpp"

#include <random>

using namespace rollfly;

TEST_CASE("rotation_about_y basics") {
  const Rotation id = rotation_about_y(0.0);
  CHECK((id.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  const Rotation half = rotation_about_y(M_PI);
  Mat3 expected;
  expected << -1, 0, 0, 0, 1, 0, 0, 0, -1;
  CHECK((half.matrix() - expected).cwiseAbs().maxCoeff() < 1e-15);

  CHECK(rotation_about_y(0.4).pitch_y() == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("rotation composition matches angle addition") {
  const Rotation composed = rotation_about_y(0.3) * rotation_about_y(0.3);
  const Rotation direct = rotation_about_y(0.6);
  CHECK((composed.matrix() - direct.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("orthonormality survives long composition chains") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  Rotation r;
  for (int i = 0; i < 10000; ++i) r = r * rotation_about_y(angle(rng));
  CHECK(r.orthonormality_error() < 1e-9);
}

TEST_CASE("titan presets carry the published values") {
  const PresetBundle roll = preset(Preset::titan_roll);
  CHECK(roll.params.mass_kg == 1.6);
  CHECK(roll.params.rotor_count == 8);
  CHECK(roll.params.rotor_height_m == 0.16);
  CHECK(roll.params.battery_J == 1.74e6);

  const PresetBundle fly = preset(Preset::titan_fly);
  CHECK(fly.params.mass_kg == 0.8);
  CHECK(fly.params.rotor_count == 4);
  CHECK(fly.params.rotor_height_m == 0.08);
  CHECK(fly.params.battery_J == 8.7e5);

  for (const auto& b : {roll, fly}) {
    CHECK(b.params.shell_radius_m == 0.2);
    CHECK(b.params.shell_width_m == 0.4);
    CHECK(b.env.drag_coeff == 2.1);
    CHECK(b.env.gravity_mps2 == 1.352);
    CHECK(b.env.air_density == 5.4);
    CHECK(b.eff.propeller == 0.6);
    CHECK(b.eff.motor == 0.85);
    CHECK(b.eff.controller == 0.95);
    CHECK(b.eff.product() == doctest::Approx(0.4845).epsilon(1e-12));
  }

  CHECK(preset_by_name("titan_roll").params.rotor_count == 8);
  CHECK_THROWS_AS(preset_by_name("jupiter"), std::invalid_argument);
}

TEST_CASE("preset inertia defaults") {
  const PresetBundle roll = preset(Preset::titan_roll);
  CHECK(roll.params.inertia(1, 1) == doctest::Approx(0.5 * 1.6 * 0.04).epsilon(1e-12));
  const PresetBundle fly = preset(Preset::titan_fly);
  CHECK(fly.params.inertia(1, 1) == doctest::Approx(0.8 * (0.16 + 0.0064) / 12.0).epsilon(1e-12));
}

TEST_CASE("validate reports violations as data") {
  PresetBundle b = preset(Preset::titan_roll);
  CHECK(validate(b.params, b.env).empty());
  CHECK(validate(preset(Preset::titan_fly).params, b.env).empty());

  b.params.mass_kg = -1.0;
  auto v = validate(b.params, b.env);
  REQUIRE(v.size() == 1);
  CHECK(v.front() == "mass must be positive");

  b = preset(Preset::titan_roll);
  b.env.rolling_resistance = 1.5;
  v = validate(b.params, b.env);
  REQUIRE(v.size() == 1);
  CHECK(v.front().find("C_rr") != std::string::npos);

  // every violation carries its own message
  b.params.rotor_count = 6;
  b.params.battery_J = 0.0;
  v = validate(b.params, b.env);
  CHECK(v.size() == 3);
}
