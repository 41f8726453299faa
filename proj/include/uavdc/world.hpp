// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "uavdc/common.hpp"

namespace uavdc {

struct Region {
  double x_max_m = 1000.0;
  double y_max_m = 1000.0;
  double altitude_m = 100.0;

  void validate() const {
    if (!(x_max_m > 0.0) || !(y_max_m > 0.0) || !(altitude_m > 0.0)) {
      throw ValidationError("region dimensions and altitude must be strictly positive");
    }
  }
};

struct Device {
  std::size_t id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  double data_initial_bits = 0.0;
  double data_remaining_bits = 0.0;
};

struct UavState {
  double x_m = 0.0;
  double y_m = 0.0;
};

// Per-slot control: heading, average speed, and how much of the slot is
// spent flying (the remainder is hover/collection time).
struct UavAction {
  double heading_rad = 0.0;
  double speed_mps = 0.0;
  double fly_time_s = 0.0;
};

struct SimParams {
  double max_speed_mps = 25.0;
  double slot_len_s = 5.0;
  double max_elevation_rad = 1.0;  // half-angle of the coverage cone
};

inline void validate_action(const UavAction& act, const SimParams& params) {
  const bool finite = std::isfinite(act.heading_rad) && std::isfinite(act.speed_mps) &&
                      std::isfinite(act.fly_time_s);
  if (!finite) throw ValidationError("action has non-finite components");
  if (act.heading_rad < 0.0 || act.heading_rad > 2.0 * M_PI) {
    throw ValidationError("heading outside [0, 2pi]");
  }
  if (act.speed_mps < 0.0 || act.speed_mps > params.max_speed_mps) {
    throw ValidationError("speed outside [0, max_speed]");
  }
  if (act.fly_time_s < 0.0 || act.fly_time_s > params.slot_len_s) {
    throw ValidationError("fly time outside [0, slot length]");
  }
}

// Applies one slot of horizontal motion. Coordinates are clamped to the
// region independently, so every in-bounds action stays feasible.
inline UavState advance_uav(const UavState& uav, const UavAction& act, const Region& region,
                            const SimParams& params) {
  validate_action(act, params);
  const double dist = act.speed_mps * act.fly_time_s;
  const double x = uav.x_m + dist * std::cos(act.heading_rad);
  const double y = uav.y_m + dist * std::sin(act.heading_rad);
  return UavState{std::clamp(x, 0.0, region.x_max_m), std::clamp(y, 0.0, region.y_max_m)};
}

inline double horizontal_distance(const UavState& uav, const Device& dev) {
  return std::hypot(dev.x_m - uav.x_m, dev.y_m - uav.y_m);
}

// Ground radius of the coverage cone below the UAV.
inline double coverage_radius(const Region& region, const SimParams& params) {
  if (!(region.altitude_m > 0.0)) throw ValidationError("altitude must be positive");
  if (!(params.max_elevation_rad > 0.0) || !(params.max_elevation_rad < M_PI / 2.0)) {
    throw ValidationError("max elevation angle must lie in (0, pi/2)");
  }
  return region.altitude_m * std::tan(params.max_elevation_rad);
}

// Devices within coverage range; the boundary is inclusive.
inline std::vector<std::size_t> covered_set(const UavState& uav, const std::vector<Device>& devices,
                                            const Region& region, const SimParams& params) {
  const double radius = coverage_radius(region, params);
  std::vector<std::size_t> ids;
  for (const Device& dev : devices) {
    if (horizontal_distance(uav, dev) <= radius) ids.push_back(dev.id);
  }
  return ids;
}

inline std::vector<std::uint8_t> covered_flags(const UavState& uav,
                                               const std::vector<Device>& devices,
                                               const Region& region, const SimParams& params) {
  const double radius = coverage_radius(region, params);
  std::vector<std::uint8_t> flags(devices.size(), 0);
  for (std::size_t i = 0; i < devices.size(); ++i) {
    flags[i] = horizontal_distance(uav, devices[i]) <= radius ? 1 : 0;
  }
  return flags;
}

// Uniform placement over the rectangle; initial data uniform in
// [data_max/2, data_max].
inline std::vector<Device> place_devices(std::size_t count, double data_max_bits,
                                         const Region& region, std::uint64_t seed) {
  region.validate();
  Rng rng(seed);
  std::vector<Device> devices(count);
  for (std::size_t i = 0; i < count; ++i) {
    devices[i].id = i;
    devices[i].x_m = rng.uniform(0.0, region.x_max_m);
    devices[i].y_m = rng.uniform(0.0, region.y_max_m);
    devices[i].data_initial_bits = rng.uniform(0.5 * data_max_bits, data_max_bits);
    devices[i].data_remaining_bits = devices[i].data_initial_bits;
  }
  return devices;
}

}  // namespace uavdc
