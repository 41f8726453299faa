// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "uavdc/common.hpp"
#include "uavdc/world.hpp"

namespace uavdc {

// One slot's device/RB assignment problem: weights[n][m] is the data volume
// collectable if device n transmits on RB m for the hover time.
struct AllocationInstance {
  std::size_t n_devices = 0;
  std::size_t n_rbs = 0;
  std::vector<double> weights;         // row-major n_devices x n_rbs
  std::vector<std::uint8_t> covered;   // per device

  double weight(std::size_t n, std::size_t m) const { return weights[n * n_rbs + m]; }
  double& weight(std::size_t n, std::size_t m) { return weights[n * n_rbs + m]; }
};

struct AllocationResult {
  std::vector<int> rb_of_device;       // -1 when unassigned
  std::vector<std::uint8_t> selected;  // devices that actually collect (weight > 0)
  double total_weight = 0.0;
};

enum class BaselineKind { random, data_aware, gain_aware };

inline AllocationInstance build_instance(const std::vector<Device>& devices,
                                         const std::vector<std::uint8_t>& covered,
                                         const std::vector<double>& rates_bps, std::size_t n_rbs,
                                         double hover_time_s) {
  AllocationInstance inst;
  inst.n_devices = devices.size();
  inst.n_rbs = n_rbs;
  inst.covered = covered;
  inst.weights.assign(inst.n_devices * n_rbs, 0.0);
  for (std::size_t n = 0; n < inst.n_devices; ++n) {
    if (!covered[n]) continue;  // uncovered rows stay all-zero
    for (std::size_t m = 0; m < n_rbs; ++m) {
      const double rate = rates_bps[n * n_rbs + m];
      if (rate < 0.0) throw std::invalid_argument("negative rate");
      inst.weight(n, m) = std::min(rate * hover_time_s, devices[n].data_remaining_bits);
    }
  }
  return inst;
}

namespace detail {

// Potential-based assignment on a square cost matrix (minimisation),
// O(s^3). Returns col_of_row.
inline std::vector<int> solve_square_min(const std::vector<double>& cost, std::size_t s) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(s + 1, 0.0), v(s + 1, 0.0);
  std::vector<std::size_t> match(s + 1, 0), way(s + 1, 0);
  for (std::size_t i = 1; i <= s; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(s + 1, inf);
    std::vector<std::uint8_t> used(s + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= s; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * s + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= s; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> col_of_row(s, -1);
  for (std::size_t j = 1; j <= s; ++j) {
    if (match[j] != 0) col_of_row[match[j] - 1] = static_cast<int>(j - 1);
  }
  return col_of_row;
}

// Reads an assignment back into a result, dropping virtual columns and
// zero-weight pairs; the total is summed in ascending device order.
inline AllocationResult collect_result(const AllocationInstance& inst,
                                       const std::vector<int>& rb_of_device) {
  AllocationResult res;
  res.rb_of_device.assign(inst.n_devices, -1);
  res.selected.assign(inst.n_devices, 0);
  res.total_weight = 0.0;
  for (std::size_t n = 0; n < inst.n_devices; ++n) {
    const int m = rb_of_device[n];
    if (m < 0 || static_cast<std::size_t>(m) >= inst.n_rbs) continue;
    const double w = inst.weight(n, static_cast<std::size_t>(m));
    if (w > 0.0) {
      res.rb_of_device[n] = m;
      res.selected[n] = 1;
      res.total_weight += w;
    }
  }
  return res;
}

}  // namespace detail

// Exact maximum-weight assignment. The bipartite sides are padded with
// zero-weight virtual vertices to a square matrix, so a perfect matching
// always exists; padding assignments are discarded on the way out.
inline AllocationResult solve_optimal(const AllocationInstance& inst) {
  if (inst.n_devices == 0 || inst.n_rbs == 0) {
    return AllocationResult{std::vector<int>(inst.n_devices, -1),
                            std::vector<std::uint8_t>(inst.n_devices, 0), 0.0};
  }
  const std::size_t s = std::max(inst.n_devices, inst.n_rbs);
  std::vector<double> cost(s * s, 0.0);
  for (std::size_t n = 0; n < inst.n_devices; ++n) {
    for (std::size_t m = 0; m < inst.n_rbs; ++m) {
      cost[n * s + m] = -inst.weight(n, m);
    }
  }
  const std::vector<int> col_of_row = detail::solve_square_min(cost, s);
  std::vector<int> rb_of_device(inst.n_devices, -1);
  for (std::size_t n = 0; n < inst.n_devices; ++n) rb_of_device[n] = col_of_row[n];
  return detail::collect_result(inst, rb_of_device);
}

// Exhaustive oracle over all injective partial device->RB assignments.
inline AllocationResult solve_bruteforce(const AllocationInstance& inst) {
  if (inst.n_devices > 8 || inst.n_rbs > 8) {
    throw std::invalid_argument("brute-force solver limited to 8 devices / 8 RBs");
  }
  const std::size_t n = inst.n_devices;
  const std::size_t m = inst.n_rbs;
  std::vector<int> current(n, -1), best(n, -1);
  std::vector<std::uint8_t> rb_used(m, 0);
  double best_total = 0.0;

  auto recurse = [&](auto&& self, std::size_t dev, double total) -> void {
    if (dev == n) {
      if (total > best_total) {
        best_total = total;
        best = current;
      }
      return;
    }
    self(self, dev + 1, total);  // leave this device unassigned
    for (std::size_t rb = 0; rb < m; ++rb) {
      if (rb_used[rb]) continue;
      const double w = inst.weight(dev, rb);
      if (w <= 0.0) continue;
      rb_used[rb] = 1;
      current[dev] = static_cast<int>(rb);
      self(self, dev + 1, total + w);
      current[dev] = -1;
      rb_used[rb] = 0;
    }
  };
  recurse(recurse, 0, 0.0);

  // Recompute the total in device order so it is bit-identical to the
  // optimal solver's summation of the same assignment.
  return detail::collect_result(inst, best);
}

struct BaselineAux {
  const std::vector<double>* remaining_data = nullptr;  // for data_aware
  const std::vector<double>* gains = nullptr;           // for gain_aware
  Rng* rng = nullptr;                                   // for random
};

namespace detail {

// Max-weight matching restricted to a device subset.
inline AllocationResult solve_restricted(const AllocationInstance& inst,
                                         const std::vector<std::size_t>& devices) {
  AllocationInstance sub;
  sub.n_devices = devices.size();
  sub.n_rbs = inst.n_rbs;
  sub.covered.assign(devices.size(), 1);
  sub.weights.resize(devices.size() * inst.n_rbs);
  for (std::size_t i = 0; i < devices.size(); ++i) {
    for (std::size_t m = 0; m < inst.n_rbs; ++m) sub.weight(i, m) = inst.weight(devices[i], m);
  }
  const AllocationResult sub_res = solve_optimal(sub);
  std::vector<int> rb_of_device(inst.n_devices, -1);
  for (std::size_t i = 0; i < devices.size(); ++i) rb_of_device[devices[i]] = sub_res.rb_of_device[i];
  return collect_result(inst, rb_of_device);
}

}  // namespace detail

// Reference selection schemes: a uniformly random feasible matching, or
// top-k device selection by remaining data / channel gain followed by a
// max-weight matching over the chosen subset.
inline AllocationResult solve_baseline(const AllocationInstance& inst, BaselineKind kind,
                                       const BaselineAux& aux) {
  std::vector<std::size_t> covered_ids;
  for (std::size_t n = 0; n < inst.n_devices; ++n) {
    if (inst.covered[n]) covered_ids.push_back(n);
  }
  const std::size_t k = std::min(covered_ids.size(), inst.n_rbs);
  if (k == 0) return detail::collect_result(inst, std::vector<int>(inst.n_devices, -1));

  switch (kind) {
    case BaselineKind::random: {
      if (aux.rng == nullptr) throw std::invalid_argument("random baseline needs an rng");
      std::vector<std::size_t> devs = covered_ids;
      std::vector<std::size_t> rbs(inst.n_rbs);
      std::iota(rbs.begin(), rbs.end(), std::size_t{0});
      aux.rng->shuffle(devs.begin(), devs.end());
      aux.rng->shuffle(rbs.begin(), rbs.end());
      std::vector<int> rb_of_device(inst.n_devices, -1);
      for (std::size_t i = 0; i < k; ++i) rb_of_device[devs[i]] = static_cast<int>(rbs[i]);
      return detail::collect_result(inst, rb_of_device);
    }
    case BaselineKind::data_aware:
    case BaselineKind::gain_aware: {
      const std::vector<double>* criterion =
          kind == BaselineKind::data_aware ? aux.remaining_data : aux.gains;
      if (criterion == nullptr) throw std::invalid_argument("baseline criterion vector missing");
      std::vector<std::size_t> order = covered_ids;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return (*criterion)[a] > (*criterion)[b];
      });
      order.resize(k);
      return detail::solve_restricted(inst, order);
    }
  }
  throw std::logic_error("unknown baseline kind");
}

// Degree and coverage feasibility of a result against its instance.
inline bool allocation_feasible(const AllocationInstance& inst, const AllocationResult& res) {
  std::vector<std::uint8_t> rb_used(inst.n_rbs, 0);
  double total = 0.0;
  for (std::size_t n = 0; n < inst.n_devices; ++n) {
    const int m = res.rb_of_device[n];
    if (m < 0) {
      if (res.selected[n]) return false;
      continue;
    }
    if (static_cast<std::size_t>(m) >= inst.n_rbs) return false;
    if (rb_used[static_cast<std::size_t>(m)]) return false;
    rb_used[static_cast<std::size_t>(m)] = 1;
    if (!res.selected[n]) return false;
    if (!inst.covered[n]) return false;
    total += inst.weight(n, static_cast<std::size_t>(m));
  }
  return total == res.total_weight;
}

}  // namespace uavdc
