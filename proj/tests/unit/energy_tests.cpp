// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "uavdc/energy.hpp"
#include "uavdc/common.hpp"

using namespace uavdc;

TEST_CASE("hover power is the sum of blade and induced power") {
  const PowerParams p;
  CHECK(propulsion_power_w(0.0, p) == p.blade_power_w + p.induced_power_w);
  CHECK(propulsion_power_w(0.0, p) == doctest::Approx(168.49).epsilon(1e-12));
}

TEST_CASE("parasite term at v=10 matches hand evaluation") {
  const PowerParams p;
  const double parasite = 0.5 * p.drag_ratio * p.air_density * p.rotor_solidity * p.rotor_area_m2 * 1000.0;
  CHECK(parasite == doctest::Approx(9.242625).epsilon(1e-12));
  const double blade = p.blade_power_w * (1.0 + 3.0 * 100.0 / (p.tip_speed_mps * p.tip_speed_mps));
  const double v0_2 = p.induced_velocity_mps * p.induced_velocity_mps;
  const double induced =
      p.induced_power_w * std::sqrt(std::sqrt(1.0 + 1e4 / (4.0 * v0_2 * v0_2)) - 100.0 / (2.0 * v0_2));
  CHECK(propulsion_power_w(10.0, p) == doctest::Approx(blade + induced + parasite).epsilon(1e-12));
}

TEST_CASE("slot energy") {
  const PowerParams p;
  CHECK(slot_energy_j(0.0, 0.0, p, 5.0) == doctest::Approx(842.45).epsilon(1e-12));
  CHECK(slot_energy_j(5.0, 12.0, p, 5.0) == doctest::Approx(5.0 * propulsion_power_w(12.0, p)));
  CHECK(slot_energy_j(2.5, 0.0, p, 5.0) == doctest::Approx(842.45).epsilon(1e-12));
  CHECK_THROWS_AS(slot_energy_j(5.5, 0.0, p, 5.0), ValidationError);
  CHECK_THROWS_AS(slot_energy_j(-0.1, 0.0, p, 5.0), ValidationError);
}

TEST_CASE("power and slot energy are strictly positive") {
  const PowerParams p;
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const double v = rng.uniform(0.0, 60.0);
    REQUIRE(propulsion_power_w(v, p) > 0.0);
    const double fly = rng.uniform(0.0, 5.0);
    REQUIRE(slot_energy_j(fly, v, p, 5.0) > 0.0);
  }
}

TEST_CASE("parasite power dominates at high speed") {
  const PowerParams p;
  for (double v = 100.0; v <= 200.0; v += 25.0) {
    const double parasite =
        0.5 * p.drag_ratio * p.air_density * p.rotor_solidity * p.rotor_area_m2 * v * v * v;
    REQUIRE(parasite / propulsion_power_w(v, p) > 0.9);
  }
}
