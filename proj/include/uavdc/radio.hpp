// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "uavdc/common.hpp"
#include "uavdc/world.hpp"

namespace uavdc {

// Probabilistic LoS channel. All members are linear-scale; the config layer
// converts dB / dBm inputs on the way in.
struct ChannelParams {
  double los_a = 15.0;
  double los_b = 0.5;
  double ref_gain = 1e-5;        // channel gain at 1 m, linear (-50 dB)
  double nlos_atten = 0.2;       // extra attenuation under NLoS, in (0,1)
  double pathloss_exp = 2.2;
  double tx_power_w = 0.1;
  double rb_bandwidth_hz = 1e6;
  double noise_psd_w_hz = dbm_per_hz_to_w_per_hz(-174.0);
  double interference_w = 0.0;   // co-channel interference per RB

  void validate() const {
    if (!(nlos_atten > 0.0) || !(nlos_atten < 1.0)) throw ValidationError("kappa must be in (0,1)");
    if (!(pathloss_exp > 0.0)) throw ValidationError("path-loss exponent must be positive");
    if (!(los_a > 0.0) || !(los_b > 0.0)) throw ValidationError("LoS parameters must be positive");
    if (!(rb_bandwidth_hz > 0.0) || !(tx_power_w > 0.0) || !(noise_psd_w_hz > 0.0)) {
      throw ValidationError("bandwidth, power and noise PSD must be positive");
    }
    if (interference_w < 0.0) throw ValidationError("interference must be nonnegative");
  }
};

// Elevation angle in degrees as seen from the device; 90 when the UAV is
// directly overhead.
inline double elevation_angle_deg(const UavState& uav, const Device& dev, const Region& region) {
  const double dist = horizontal_distance(uav, dev);
  if (dist == 0.0) return 90.0;
  return (180.0 / M_PI) * std::atan(region.altitude_m / dist);
}

inline double los_probability(double elevation_deg, const ChannelParams& params) {
  return 1.0 / (1.0 + params.los_a * std::exp(-params.los_b * (elevation_deg - params.los_a)));
}

inline double nlos_probability(double elevation_deg, const ChannelParams& params) {
  return 1.0 - los_probability(elevation_deg, params);
}

// Expected large-scale gain: LoS/NLoS mixture over 3D distance path loss.
inline double expected_gain(const UavState& uav, const Device& dev, const Region& region,
                            const ChannelParams& params) {
  const double p_los = los_probability(elevation_angle_deg(uav, dev, region), params);
  const double dx = uav.x_m - dev.x_m;
  const double dy = uav.y_m - dev.y_m;
  const double sq_dist = region.altitude_m * region.altitude_m + dx * dx + dy * dy;
  const double mix = p_los + (1.0 - p_los) * params.nlos_atten;
  return params.ref_gain * mix / std::pow(sq_dist, params.pathloss_exp / 2.0);
}

inline double achievable_rate_bps(double gain, const ChannelParams& params) {
  const double noise = params.interference_w + params.rb_bandwidth_hz * params.noise_psd_w_hz;
  return params.rb_bandwidth_hz * std::log2(1.0 + params.tx_power_w * gain / noise);
}

}  // namespace uavdc
