// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "uavdc/common.hpp"

namespace uavdc {

// Rotary-wing propulsion model. The source model overloads a few symbols
// (air density vs. soft-update mix, drag ratio vs. reference distance);
// field names here disambiguate.
struct PowerParams {
  double blade_power_w = 79.86;        // profile power while hovering
  double induced_power_w = 88.63;      // induced power while hovering
  double tip_speed_mps = 120.0;
  double induced_velocity_mps = 4.03;  // mean rotor induced velocity in hover
  double drag_ratio = 0.6;
  double air_density = 1.225;
  double rotor_solidity = 0.05;
  double rotor_area_m2 = 0.503;

  void validate() const {
    const bool ok = blade_power_w > 0.0 && induced_power_w > 0.0 && tip_speed_mps > 0.0 &&
                    induced_velocity_mps > 0.0 && drag_ratio > 0.0 && air_density > 0.0 &&
                    rotor_solidity > 0.0 && rotor_area_m2 > 0.0;
    if (!ok) throw ValidationError("power parameters must be strictly positive");
  }
};

inline double hover_power_w(const PowerParams& p) { return p.blade_power_w + p.induced_power_w; }

// Blade profile + induced + parasite power at horizontal speed v.
inline double propulsion_power_w(double speed_mps, const PowerParams& p) {
  const double v2 = speed_mps * speed_mps;
  const double blade = p.blade_power_w * (1.0 + 3.0 * v2 / (p.tip_speed_mps * p.tip_speed_mps));
  const double v0_2 = p.induced_velocity_mps * p.induced_velocity_mps;
  const double inner = std::sqrt(1.0 + v2 * v2 / (4.0 * v0_2 * v0_2)) - v2 / (2.0 * v0_2);
  const double induced = p.induced_power_w * std::sqrt(std::max(inner, 0.0));
  const double parasite =
      0.5 * p.drag_ratio * p.air_density * p.rotor_solidity * p.rotor_area_m2 * v2 * speed_mps;
  return blade + induced + parasite;
}

// Energy over one slot: fly at speed v for fly_time, hover for the rest.
inline double slot_energy_j(double fly_time_s, double speed_mps, const PowerParams& p,
                            double slot_len_s) {
  if (fly_time_s < 0.0 || fly_time_s > slot_len_s) {
    throw ValidationError("fly time outside [0, slot length]");
  }
  return fly_time_s * propulsion_power_w(speed_mps, p) + (slot_len_s - fly_time_s) * hover_power_w(p);
}

}  // namespace uavdc
