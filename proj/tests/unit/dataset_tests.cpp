// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "uavdc/datasets.hpp"

using namespace uavdc;

namespace {

Scenario small_scenario() {
  Scenario sc = Scenario::desk_default();
  sc.n_devices = 6;
  sc.n_rbs = 2;
  sc.episode.horizon = 25;
  sc.placement_seed = 31;
  return sc;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("compute_rtg builds suffix sums") {
  CHECK(compute_rtg({1, 2, 3}) == std::vector<double>{6, 5, 3});
  CHECK(compute_rtg({4.25}) == std::vector<double>{4.25});
  CHECK(compute_rtg({0, 0, 0, 0}) == std::vector<double>{0, 0, 0, 0});
  CHECK_THROWS_AS(compute_rtg({}), std::invalid_argument);
}

TEST_CASE("rtg telescoping holds bitwise on generated episodes") {
  const Scenario sc = small_scenario();
  const BehaviorPolicy noisy{BehaviorPolicy::Kind::noisy, 0.4};
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const Trajectory traj = run_episode(noisy, sc, seed);
    REQUIRE(!traj.steps.empty());
    REQUIRE(traj.steps.size() <= sc.episode.horizon);
    for (std::size_t t = 0; t + 1 < traj.steps.size(); ++t) {
      const double residual = traj.steps[t].rtg - traj.steps[t + 1].rtg - traj.steps[t].reward;
      REQUIRE(std::abs(residual) <= 1e-9 * std::max(1.0, std::abs(traj.steps[t].rtg)));
    }
    REQUIRE(traj.steps.back().rtg == traj.steps.back().reward);
    REQUIRE(traj.episode_return == traj.steps.front().rtg);
  }
}

TEST_CASE("greedy policy behavior") {
  const Scenario sc = small_scenario();

  SUBCASE("hovers once everything is drained") {
    WorldState ws;
    ws.uav = sc.start_position();
    ws.devices = {{0, 100.0, 100.0, 1e6, 0.0}};
    const UavAction a = greedy_nearest_action(ws, sc);
    CHECK(a.heading_rad == 0.0);
    CHECK(a.speed_mps == 0.0);
    CHECK(a.fly_time_s == 0.0);
  }
  SUBCASE("heads due east toward a device beyond coverage") {
    WorldState ws;
    ws.uav = UavState{100.0, 500.0};
    ws.devices = {{0, 900.0, 500.0, 1e6, 1e6}};
    const UavAction a = greedy_nearest_action(ws, sc);
    CHECK(a.heading_rad == doctest::Approx(0.0));
    CHECK(a.speed_mps > 0.0);
    CHECK(a.fly_time_s > 0.0);
  }
  SUBCASE("hovers when a covered device still has data") {
    WorldState ws;
    ws.uav = UavState{500.0, 500.0};
    ws.devices = {{0, 520.0, 500.0, 1e6, 1e6}};
    const UavAction a = greedy_nearest_action(ws, sc);
    CHECK(a.speed_mps == 0.0);
  }
}

TEST_CASE("noisy policy always emits feasible actions") {
  const Scenario sc = small_scenario();
  const BehaviorPolicy noisy{BehaviorPolicy::Kind::noisy, 0.8};
  Rng rng(12);
  WorldState ws;
  ws.uav = sc.start_position();
  ws.devices = sc.make_devices();
  for (int i = 0; i < 5000; ++i) {
    const UavAction a = noisy.act(ws, sc, rng);
    REQUIRE_NOTHROW(validate_action(a, sc.sim));
  }
}

TEST_CASE("dataset generation is deterministic byte for byte") {
  const Scenario sc = small_scenario();
  const BehaviorPolicy policy{BehaviorPolicy::Kind::noisy, 0.3};
  const Dataset a = generate_dataset(policy, sc, "cafe0123", 5, 99);
  const Dataset b = generate_dataset(policy, sc, "cafe0123", 5, 99);
  CHECK(serialize_dataset(a) == serialize_dataset(b));
  const Dataset c = generate_dataset(policy, sc, "cafe0123", 5, 100);
  CHECK(serialize_dataset(a) != serialize_dataset(c));
}

TEST_CASE("dataset round-trip reproduces every float exactly") {
  const Scenario sc = small_scenario();
  const BehaviorPolicy policy{BehaviorPolicy::Kind::noisy, 0.5};
  const Dataset ds = generate_dataset(policy, sc, "cafe0123", 4, 7);
  const std::string path = temp_path("uavdc_roundtrip_test.jsonl");
  save_dataset(path, ds);
  const Dataset back = load_dataset(path);
  std::remove(path.c_str());

  REQUIRE(back.trajectories.size() == ds.trajectories.size());
  CHECK(back.meta.reward_norm == ds.meta.reward_norm);
  CHECK(back.meta.policy_tag == ds.meta.policy_tag);
  CHECK(back.meta.scenario_hash == ds.meta.scenario_hash);
  for (std::size_t e = 0; e < ds.trajectories.size(); ++e) {
    const Trajectory& t0 = ds.trajectories[e];
    const Trajectory& t1 = back.trajectories[e];
    REQUIRE(t1.steps.size() == t0.steps.size());
    REQUIRE(t1.seed == t0.seed);
    for (std::size_t i = 0; i < t0.steps.size(); ++i) {
      REQUIRE(t1.steps[i].rtg == t0.steps[i].rtg);
      REQUIRE(t1.steps[i].reward == t0.steps[i].reward);
      REQUIRE(t1.steps[i].state == t0.steps[i].state);
      REQUIRE(t1.steps[i].action == t0.steps[i].action);
    }
  }
}

TEST_CASE("behavior policy quality ordering: greedy > random, less noise > more noise") {
  const Scenario sc = small_scenario();
  auto mean_return = [&](const BehaviorPolicy& p, std::uint64_t seed) {
    const Dataset ds = generate_dataset(p, sc, "x", 50, seed);
    double sum = 0.0;
    for (const Trajectory& t : ds.trajectories) sum += t.episode_return;
    return sum / static_cast<double>(ds.trajectories.size());
  };
  const double greedy = mean_return({BehaviorPolicy::Kind::greedy_nearest, 0.0}, 5);
  const double noisy3 = mean_return({BehaviorPolicy::Kind::noisy, 0.3}, 6);
  const double noisy6 = mean_return({BehaviorPolicy::Kind::noisy, 0.6}, 7);
  const double random = mean_return({BehaviorPolicy::Kind::random, 0.0}, 8);
  CHECK(greedy > random);
  CHECK(noisy3 > noisy6);
  CHECK(greedy >= noisy3);
}

TEST_CASE("dataset header validation") {
  std::istringstream bad_key(
      "{\"format_version\":1,\"encoding\":\"decimal17\",\"scenario_hash\":\"x\","
      "\"policy_tag\":\"t\",\"episodes\":0,\"reward_norm\":1.0,\"surprise\":3}\n");
  CHECK_THROWS_AS(parse_dataset(bad_key), ValidationError);
  std::istringstream bad_version(
      "{\"format_version\":9,\"encoding\":\"decimal17\",\"scenario_hash\":\"x\","
      "\"policy_tag\":\"t\",\"episodes\":0,\"reward_norm\":1.0}\n");
  CHECK_THROWS_AS(parse_dataset(bad_version), ValidationError);
}
