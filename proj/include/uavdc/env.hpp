// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "uavdc/allocator.hpp"
#include "uavdc/energy.hpp"
#include "uavdc/radio.hpp"
#include "uavdc/scenario.hpp"
#include "uavdc/world.hpp"

namespace uavdc {

using Observation = std::vector<double>;

struct WorldState {
  UavState uav;
  std::vector<Device> devices;
  std::size_t slot = 1;  // 1-based slot index
};

struct StepOutcome {
  Observation next_obs;
  double reward_bits_per_j = 0.0;
  std::vector<double> collected_bits;
  double energy_j = 0.0;
  bool done = false;
  AllocationResult allocation;
};

// Normalized UAV position, normalized remaining data, coverage flags.
inline Observation encode_observation(const WorldState& ws, const Scenario& sc) {
  Observation obs;
  obs.reserve(2 + 2 * ws.devices.size());
  obs.push_back(ws.uav.x_m / sc.region.x_max_m);
  obs.push_back(ws.uav.y_m / sc.region.y_max_m);
  for (const Device& d : ws.devices) obs.push_back(d.data_remaining_bits / sc.data_max_bits);
  const std::vector<std::uint8_t> cov = covered_flags(ws.uav, ws.devices, sc.region, sc.sim);
  for (std::uint8_t f : cov) obs.push_back(static_cast<double>(f));
  return obs;
}

inline std::size_t observation_size(const Scenario& sc) { return 2 + 2 * sc.n_devices; }

// Per-device achievable rates at the current position, replicated across
// RBs (a flat interference constant adds no RB dependence).
inline std::vector<double> rate_matrix(const WorldState& ws, const Scenario& sc) {
  std::vector<double> rates(ws.devices.size() * sc.n_rbs, 0.0);
  for (std::size_t n = 0; n < ws.devices.size(); ++n) {
    const double gain = expected_gain(ws.uav, ws.devices[n], sc.region, sc.channel);
    const double rate = achievable_rate_bps(gain, sc.channel);
    for (std::size_t m = 0; m < sc.n_rbs; ++m) rates[n * sc.n_rbs + m] = rate;
  }
  return rates;
}

inline AllocationInstance slot_instance(const WorldState& ws, const Scenario& sc,
                                        double hover_time_s) {
  const std::vector<std::uint8_t> cov = covered_flags(ws.uav, ws.devices, sc.region, sc.sim);
  return build_instance(ws.devices, cov, rate_matrix(ws, sc), sc.n_rbs, hover_time_s);
}

// One slot of dynamics: move, cover, rate, allocate, collect, reward.
// Throws before mutating anything if the action is invalid. The done flag
// is left to the episode wrapper.
inline StepOutcome advance_world(WorldState& ws, const UavAction& action, const Scenario& sc) {
  validate_action(action, sc.sim);
  ws.uav = advance_uav(ws.uav, action, sc.region, sc.sim);
  const double hover_time = sc.sim.slot_len_s - action.fly_time_s;
  const AllocationInstance inst = slot_instance(ws, sc, hover_time);
  const AllocationResult alloc = solve_optimal(inst);

  StepOutcome out;
  out.allocation = alloc;
  out.collected_bits.assign(ws.devices.size(), 0.0);
  double collected_total = 0.0;
  for (std::size_t n = 0; n < ws.devices.size(); ++n) {
    if (alloc.rb_of_device[n] < 0) continue;
    const double delta = inst.weight(n, static_cast<std::size_t>(alloc.rb_of_device[n]));
    out.collected_bits[n] = delta;
    collected_total += delta;
    ws.devices[n].data_remaining_bits = std::max(ws.devices[n].data_remaining_bits - delta, 0.0);
  }
  out.energy_j = slot_energy_j(action.fly_time_s, action.speed_mps, sc.power, sc.sim.slot_len_s);
  out.reward_bits_per_j = collected_total / out.energy_j;
  ws.slot += 1;
  return out;
}

// Episode wrapper. Purely deterministic given the scenario; the seed only
// labels the episode (device placement comes from the scenario's own seed).
class Environment {
 public:
  explicit Environment(const Scenario& scenario, std::uint64_t episode_seed = 0)
      : scenario_(scenario), episode_seed_(episode_seed) {
    scenario_.validate();
    reset();
  }

  const Observation& reset() {
    state_.devices = scenario_.make_devices();
    state_.uav = scenario_.start_position();
    state_.slot = 1;
    obs_ = encode_observation(state_, scenario_);
    done_ = false;
    return obs_;
  }

  StepOutcome step(const UavAction& action) {
    if (done_) throw std::logic_error("step() called on a finished episode");
    const bool horizon_hit = state_.slot >= scenario_.episode.horizon;
    StepOutcome out = advance_world(state_, action, scenario_);
    const bool drained = scenario_.episode.stop_when_drained && all_drained();
    done_ = horizon_hit || drained;
    out.done = done_;
    obs_ = encode_observation(state_, scenario_);
    out.next_obs = obs_;
    return out;
  }

  bool all_drained() const {
    for (const Device& d : state_.devices) {
      if (d.data_remaining_bits > 0.0) return false;
    }
    return true;
  }

  const Observation& observation() const { return obs_; }
  const WorldState& world() const { return state_; }
  const Scenario& scenario() const { return scenario_; }
  std::uint64_t episode_seed() const { return episode_seed_; }
  bool done() const { return done_; }

 private:
  Scenario scenario_;
  std::uint64_t episode_seed_;
  WorldState state_;
  Observation obs_;
  bool done_ = false;
};

}  // namespace uavdc
