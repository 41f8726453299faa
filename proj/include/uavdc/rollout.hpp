// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "uavdc/datasets.hpp"
#include "uavdc/dt_model.hpp"
#include "uavdc/env.hpp"

namespace uavdc::crdt {

struct RolloutResult {
  Trajectory trajectory;        // realized rewards with recomputed suffix RTGs
  double realized_return = 0.0;
  double rtg_initial = 0.0;     // conditioning bookkeeping, raw units
  double rtg_final = 0.0;
  double collected_bits = 0.0;
  double energy_j = 0.0;

  double efficiency_bits_per_j() const { return energy_j > 0.0 ? collected_bits / energy_j : 0.0; }
};

// Autoregressive deployment: keep a window of the last K completed
// (RTG, state, action) triples plus the current (RTG, state) pair, predict
// the next action, step the environment, subtract the reward from the RTG.
inline RolloutResult rollout(const DtModel& model, const Scenario& sc, std::uint64_t episode_seed,
                             double target_rtg_raw, std::size_t context_len) {
  if (context_len == 0 || context_len > model.config().context_len) {
    throw std::invalid_argument("rollout context outside [1, model context]");
  }
  const double scale = model.config().rtg_scale;
  const std::size_t state_dim = model.config().state_dim;

  Environment env(sc, episode_seed);
  if (env.observation().size() != state_dim) {
    throw std::invalid_argument("scenario observation size does not match the model");
  }

  std::vector<double> hist_rtg;                     // raw units
  std::vector<Observation> hist_state;
  std::vector<std::array<double, 3>> hist_action;   // normalized

  RolloutResult res;
  res.rtg_initial = target_rtg_raw;
  double rtg = target_rtg_raw;

  while (!env.done()) {
    const std::size_t t = env.world().slot;  // 1-based
    hist_rtg.push_back(rtg);
    hist_state.push_back(env.observation());

    const std::size_t k = context_len;
    const std::size_t valid = std::min<std::size_t>(k, t);
    Segment seg;
    seg.context = k;
    seg.valid = valid;
    seg.last_action_valid = false;
    seg.rtg.assign(k, 0.0);
    seg.states.assign(k * state_dim, 0.0);
    seg.actions.assign(k * 3, 0.0);
    seg.rewards.assign(k, 0.0);
    seg.timesteps.assign(k, 0);
    for (std::size_t p = k - valid; p < k; ++p) {
      const std::size_t g = t - (k - 1 - p);  // global step index, 1-based
      seg.timesteps[p] = g;
      seg.rtg[p] = hist_rtg[g - 1] / scale;
      std::copy(hist_state[g - 1].begin(), hist_state[g - 1].end(),
                seg.states.begin() + static_cast<std::ptrdiff_t>(p * state_dim));
      if (g < t) {
        for (std::size_t c = 0; c < 3; ++c) seg.actions[p * 3 + c] = hist_action[g - 1][c];
      }
    }

    const std::array<double, 3> action_norm = model.predict_last_norm(seg);
    const UavAction action = model.denormalize_action(action_norm);

    TrajectoryStep step;
    step.state = env.observation();
    step.action = {action.heading_rad, action.speed_mps, action.fly_time_s};
    const StepOutcome out = env.step(action);
    step.reward = out.reward_bits_per_j;
    res.trajectory.steps.push_back(std::move(step));

    res.realized_return += out.reward_bits_per_j;
    res.collected_bits += out.reward_bits_per_j * out.energy_j;
    res.energy_j += out.energy_j;
    rtg -= out.reward_bits_per_j;
    hist_action.push_back(action_norm);
  }
  res.rtg_final = rtg;
  res.trajectory.seed = episode_seed;

  std::vector<double> rewards;
  rewards.reserve(res.trajectory.steps.size());
  for (const TrajectoryStep& s : res.trajectory.steps) rewards.push_back(s.reward);
  if (!rewards.empty()) {
    const std::vector<double> rtgs = compute_rtg(rewards);
    for (std::size_t i = 0; i < rtgs.size(); ++i) res.trajectory.steps[i].rtg = rtgs[i];
    res.trajectory.episode_return = rtgs.front();
  }
  return res;
}

}  // namespace uavdc::crdt
