// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavdc/common.hpp"
#include "uavdc/env.hpp"

namespace uavdc {

struct TrajectoryStep {
  double rtg = 0.0;  // suffix sum of rewards from this step on
  Observation state;
  std::array<double, 3> action{};  // heading, speed, fly time (raw units)
  double reward = 0.0;
};

struct Trajectory {
  std::uint64_t seed = 0;
  std::vector<TrajectoryStep> steps;
  double episode_return = 0.0;
};

struct DatasetMeta {
  int format_version = 1;
  std::string encoding = "decimal17";
  std::string scenario_hash;
  std::string policy_tag;
  std::size_t episodes = 0;
  double reward_norm = 1.0;  // scale constant for rewards/RTGs inside the learner
};

struct Dataset {
  DatasetMeta meta;
  std::vector<Trajectory> trajectories;

  double max_return() const {
    double best = 0.0;
    for (const Trajectory& t : trajectories) best = std::max(best, t.episode_return);
    return best;
  }
};

// Suffix sums, built with the exact recurrence rtg[t] = rtg[t+1] + r[t] so
// the telescoping identity holds bitwise.
inline std::vector<double> compute_rtg(const std::vector<double>& rewards) {
  if (rewards.empty()) throw std::invalid_argument("compute_rtg: empty reward list");
  std::vector<double> rtg(rewards.size());
  rtg.back() = rewards.back();
  for (std::size_t i = rewards.size() - 1; i-- > 0;) rtg[i] = rtg[i + 1] + rewards[i];
  return rtg;
}

// Scripted collector: hover whenever a covered device still holds data,
// otherwise head for the nearest device with data, pacing speed and flight
// time to arrive with hover time to spare.
inline UavAction greedy_nearest_action(const WorldState& ws, const Scenario& sc) {
  const double radius = coverage_radius(sc.region, sc.sim);
  double best_dist = 0.0;
  const Device* target = nullptr;
  for (const Device& d : ws.devices) {
    if (d.data_remaining_bits <= 0.0) continue;
    const double dist = horizontal_distance(ws.uav, d);
    if (dist <= radius) return UavAction{0.0, 0.0, 0.0};  // collect in place
    if (target == nullptr || dist < best_dist) {
      target = &d;
      best_dist = dist;
    }
  }
  if (target == nullptr) return UavAction{0.0, 0.0, 0.0};  // nothing left anywhere

  double heading = std::atan2(target->y_m - ws.uav.y_m, target->x_m - ws.uav.x_m);
  if (heading < 0.0) heading += 2.0 * M_PI;
  const double approach = best_dist - 0.5 * radius;  // aim well inside coverage
  const double fly_budget = 0.5 * sc.sim.slot_len_s;
  const double speed = std::min(sc.sim.max_speed_mps, approach / fly_budget);
  const double fly_time = std::min(sc.sim.slot_len_s, approach / speed);
  return UavAction{heading, speed, fly_time};
}

struct BehaviorPolicy {
  enum class Kind { greedy_nearest, noisy, random };
  Kind kind = Kind::greedy_nearest;
  double sigma = 0.0;  // noise level for Kind::noisy

  std::string tag() const {
    switch (kind) {
      case Kind::greedy_nearest:
        return "greedy_nearest";
      case Kind::noisy: {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "noisy(%g)", sigma);
        return buf;
      }
      case Kind::random:
        return "random";
    }
    return "?";
  }

  UavAction act(const WorldState& ws, const Scenario& sc, Rng& rng) const {
    switch (kind) {
      case Kind::greedy_nearest:
        return greedy_nearest_action(ws, sc);
      case Kind::noisy: {
        UavAction a = greedy_nearest_action(ws, sc);
        a.heading_rad = std::clamp(a.heading_rad + rng.normal(0.0, sigma * 2.0 * M_PI), 0.0, 2.0 * M_PI);
        a.speed_mps = std::clamp(a.speed_mps + rng.normal(0.0, sigma * sc.sim.max_speed_mps), 0.0,
                                 sc.sim.max_speed_mps);
        a.fly_time_s = std::clamp(a.fly_time_s + rng.normal(0.0, sigma * sc.sim.slot_len_s), 0.0,
                                  sc.sim.slot_len_s);
        return a;
      }
      case Kind::random:
        return UavAction{rng.uniform(0.0, 2.0 * M_PI), rng.uniform(0.0, sc.sim.max_speed_mps),
                         rng.uniform(0.0, sc.sim.slot_len_s)};
    }
    return UavAction{};
  }
};

inline Trajectory run_episode(const BehaviorPolicy& policy, const Scenario& sc,
                              std::uint64_t episode_seed) {
  Environment env(sc, episode_seed);
  Rng rng(episode_seed);
  Trajectory traj;
  traj.seed = episode_seed;
  std::vector<double> rewards;
  while (!env.done()) {
    TrajectoryStep step;
    step.state = env.observation();
    const UavAction a = policy.act(env.world(), sc, rng);
    step.action = {a.heading_rad, a.speed_mps, a.fly_time_s};
    const StepOutcome out = env.step(a);
    step.reward = out.reward_bits_per_j;
    rewards.push_back(step.reward);
    traj.steps.push_back(std::move(step));
  }
  const std::vector<double> rtg = compute_rtg(rewards);
  for (std::size_t i = 0; i < traj.steps.size(); ++i) traj.steps[i].rtg = rtg[i];
  traj.episode_return = rtg.front();
  return traj;
}

inline Dataset generate_dataset(const BehaviorPolicy& policy, const Scenario& sc,
                                const std::string& scenario_hash, std::size_t episodes,
                                std::uint64_t master_seed) {
  if (episodes == 0) throw ValidationError("dataset needs at least one episode");
  Dataset ds;
  ds.meta.scenario_hash = scenario_hash;
  ds.meta.policy_tag = policy.tag();
  ds.meta.episodes = episodes;
  for (std::size_t e = 0; e < episodes; ++e) {
    ds.trajectories.push_back(run_episode(policy, sc, derive_seed(master_seed, e)));
  }
  double norm = 0.0;
  for (const Trajectory& t : ds.trajectories) norm = std::max(norm, std::abs(t.episode_return));
  ds.meta.reward_norm = norm > 0.0 ? norm : 1.0;
  return ds;
}

namespace detail {

// 17 significant digits: enough to reproduce any double exactly.
inline void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

inline void append_number_list(std::string& out, const double* vals, std::size_t n) {
  out += '[';
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out += ',';
    append_number(out, vals[i]);
  }
  out += ']';
}

}  // namespace detail

// Line-delimited container: a self-describing header record followed by one
// episode record per line. Written by hand so the decimal encoding is pinned.
inline std::string serialize_dataset(const Dataset& ds) {
  std::string out;
  out += "{\"format_version\":1,\"encoding\":\"decimal17\",\"scenario_hash\":\"";
  out += ds.meta.scenario_hash;
  out += "\",\"policy_tag\":\"";
  out += ds.meta.policy_tag;
  out += "\",\"episodes\":" + std::to_string(ds.trajectories.size());
  out += ",\"reward_norm\":";
  detail::append_number(out, ds.meta.reward_norm);
  out += "}\n";
  for (const Trajectory& t : ds.trajectories) {
    out += "{\"seed\":" + std::to_string(t.seed) + ",\"steps\":[";
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      const TrajectoryStep& s = t.steps[i];
      if (i > 0) out += ',';
      out += "{\"rtg\":";
      detail::append_number(out, s.rtg);
      out += ",\"state\":";
      detail::append_number_list(out, s.state.data(), s.state.size());
      out += ",\"action\":";
      detail::append_number_list(out, s.action.data(), s.action.size());
      out += ",\"reward\":";
      detail::append_number(out, s.reward);
      out += '}';
    }
    out += "]}\n";
  }
  return out;
}

inline void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write dataset file: " + path);
  f << serialize_dataset(ds);
}

inline Dataset parse_dataset(std::istream& in) {
  Dataset ds;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("dataset file is empty");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("dataset header parse error: ") + e.what());
  }
  detail::reject_unknown_keys(
      header, {"format_version", "encoding", "scenario_hash", "policy_tag", "episodes", "reward_norm"},
      "dataset header");
  ds.meta.format_version = header.at("format_version").get<int>();
  if (ds.meta.format_version != 1) throw ValidationError("unsupported dataset format_version");
  ds.meta.encoding = header.at("encoding").get<std::string>();
  if (ds.meta.encoding != "decimal17") throw ValidationError("unsupported dataset encoding");
  ds.meta.scenario_hash = header.at("scenario_hash").get<std::string>();
  ds.meta.policy_tag = header.at("policy_tag").get<std::string>();
  ds.meta.episodes = header.at("episodes").get<std::size_t>();
  ds.meta.reward_norm = header.at("reward_norm").get<double>();

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("dataset record parse error: ") + e.what());
    }
    Trajectory t;
    t.seed = rec.at("seed").get<std::uint64_t>();
    for (const auto& js : rec.at("steps")) {
      TrajectoryStep step;
      step.rtg = js.at("rtg").get<double>();
      step.state = js.at("state").get<std::vector<double>>();
      const auto act = js.at("action").get<std::vector<double>>();
      if (act.size() != 3) throw ValidationError("action record must have 3 components");
      std::copy(act.begin(), act.end(), step.action.begin());
      step.reward = js.at("reward").get<double>();
      t.steps.push_back(std::move(step));
    }
    if (!t.steps.empty()) t.episode_return = t.steps.front().rtg;
    ds.trajectories.push_back(std::move(t));
  }
  if (ds.trajectories.size() != ds.meta.episodes) {
    throw ValidationError("dataset episode count does not match header");
  }
  return ds;
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open dataset file: " + path);
  return parse_dataset(f);
}

}  // namespace uavdc
