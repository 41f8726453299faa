// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "uavdc/env.hpp"

namespace uavdc {

// Per-slot allocator comparison along scripted UAV trajectories. Every
// allocator is scored on the same instance each slot (state evolves under
// the optimal allocation), so optimality dominance is observable per slot.
struct AllocatorComparisonRow {
  std::size_t trajectory = 0;
  std::size_t slot = 0;
  std::string allocator;
  double collected_bits = 0.0;
  double energy_j = 0.0;
  double efficiency_bits_per_j = 0.0;
  std::size_t covered_count = 0;
  bool contended = false;  // more covered devices than RBs
};

inline std::vector<AllocatorComparisonRow> compare_allocators(const Scenario& sc,
                                                              std::size_t n_trajectories,
                                                              std::uint64_t seed) {
  std::vector<AllocatorComparisonRow> rows;
  for (std::size_t traj = 0; traj < n_trajectories; ++traj) {
    Rng script(derive_seed(seed, traj));
    Rng baseline_rng(derive_seed(seed, 1000 + traj));
    WorldState ws;
    ws.devices = sc.make_devices();
    ws.uav = sc.start_position();
    ws.slot = 1;

    for (std::size_t slot = 1; slot <= sc.episode.horizon; ++slot) {
      const UavAction act{script.uniform(0.0, 2.0 * M_PI), script.uniform(0.0, sc.sim.max_speed_mps),
                          script.uniform(0.0, sc.sim.slot_len_s)};
      ws.uav = advance_uav(ws.uav, act, sc.region, sc.sim);
      const double hover = sc.sim.slot_len_s - act.fly_time_s;
      const AllocationInstance inst = slot_instance(ws, sc, hover);
      const double energy = slot_energy_j(act.fly_time_s, act.speed_mps, sc.power, sc.sim.slot_len_s);

      std::size_t covered_count = 0;
      for (std::uint8_t c : inst.covered) covered_count += c;
      const bool contended = covered_count > sc.n_rbs;

      std::vector<double> remaining(ws.devices.size());
      std::vector<double> gains(ws.devices.size());
      for (std::size_t n = 0; n < ws.devices.size(); ++n) {
        remaining[n] = ws.devices[n].data_remaining_bits;
        gains[n] = expected_gain(ws.uav, ws.devices[n], sc.region, sc.channel);
      }
      BaselineAux aux;
      aux.remaining_data = &remaining;
      aux.gains = &gains;
      aux.rng = &baseline_rng;

      const AllocationResult opt = solve_optimal(inst);
      auto push = [&](const char* name, const AllocationResult& res) {
        rows.push_back({traj, slot, name, res.total_weight, energy,
                        res.total_weight / energy, covered_count, contended});
      };
      push("optimal", opt);
      push("random", solve_baseline(inst, BaselineKind::random, aux));
      push("data_aware", solve_baseline(inst, BaselineKind::data_aware, aux));
      push("gain_aware", solve_baseline(inst, BaselineKind::gain_aware, aux));

      // the system itself runs the optimal allocation
      for (std::size_t n = 0; n < ws.devices.size(); ++n) {
        if (opt.rb_of_device[n] < 0) continue;
        const double delta = inst.weight(n, static_cast<std::size_t>(opt.rb_of_device[n]));
        ws.devices[n].data_remaining_bits = std::max(ws.devices[n].data_remaining_bits - delta, 0.0);
      }
      ws.slot += 1;
    }
  }
  return rows;
}

}  // namespace uavdc
