// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "uavdc/rollout.hpp"
#include "uavdc/trainer.hpp"

using namespace uavdc;
using crdt::DtConfig;
using crdt::DtModel;
using crdt::RolloutResult;

namespace {

Scenario tiny_scenario() {
  Scenario sc = Scenario::desk_default();
  sc.n_devices = 4;
  sc.n_rbs = 2;
  sc.episode.horizon = 10;
  sc.placement_seed = 77;
  return sc;
}

DtModel make_model(const Scenario& sc, std::size_t context) {
  DtConfig cfg;
  cfg.state_dim = observation_size(sc);
  cfg.hidden_dim = 16;
  cfg.n_layers = 1;
  cfg.n_heads = 2;
  cfg.context_len = context;
  cfg.max_timestep = sc.episode.horizon;
  cfg.rtg_scale = 0.05;
  cfg.action_high = {2.0 * M_PI, sc.sim.max_speed_mps, sc.sim.slot_len_s};
  cfg.init_seed = 13;
  return DtModel(cfg);
}

}  // namespace

TEST_CASE("rollout RTG bookkeeping telescopes to the realized return") {
  const Scenario sc = tiny_scenario();
  const DtModel model = make_model(sc, 4);
  const RolloutResult res = crdt::rollout(model, sc, 1, 0.1, 4);
  REQUIRE(!res.trajectory.steps.empty());
  REQUIRE(res.trajectory.steps.size() <= sc.episode.horizon);
  const double telescoped = res.rtg_initial - res.rtg_final;
  CHECK(std::abs(telescoped - res.realized_return) <=
        1e-9 * std::max(1.0, std::abs(res.realized_return)));
  // stored trajectory carries recomputed suffix sums
  CHECK(res.trajectory.episode_return == res.trajectory.steps.front().rtg);
  for (std::size_t t = 0; t + 1 < res.trajectory.steps.size(); ++t) {
    CHECK(res.trajectory.steps[t].rtg ==
          res.trajectory.steps[t + 1].rtg + res.trajectory.steps[t].reward);
  }
}

TEST_CASE("rollout actions always satisfy the control bounds") {
  const Scenario sc = tiny_scenario();
  const DtModel model = make_model(sc, 4);
  const RolloutResult res = crdt::rollout(model, sc, 2, 0.5, 4);
  for (const TrajectoryStep& step : res.trajectory.steps) {
    const UavAction act{step.action[0], step.action[1], step.action[2]};
    REQUIRE_NOTHROW(validate_action(act, sc.sim));
  }
}

TEST_CASE("a context of one still runs (memoryless conditioning)") {
  const Scenario sc = tiny_scenario();
  const DtModel model = make_model(sc, 1);
  const RolloutResult res = crdt::rollout(model, sc, 3, 0.2, 1);
  CHECK(!res.trajectory.steps.empty());
}

TEST_CASE("rollouts are deterministic") {
  const Scenario sc = tiny_scenario();
  const DtModel model = make_model(sc, 4);
  const RolloutResult a = crdt::rollout(model, sc, 4, 0.3, 4);
  const RolloutResult b = crdt::rollout(model, sc, 4, 0.3, 4);
  REQUIRE(a.trajectory.steps.size() == b.trajectory.steps.size());
  for (std::size_t t = 0; t < a.trajectory.steps.size(); ++t) {
    REQUIRE(a.trajectory.steps[t].action == b.trajectory.steps[t].action);
    REQUIRE(a.trajectory.steps[t].reward == b.trajectory.steps[t].reward);
  }
}

TEST_CASE("rollout rejects contexts beyond the model window") {
  const Scenario sc = tiny_scenario();
  const DtModel model = make_model(sc, 4);
  CHECK_THROWS_AS(crdt::rollout(model, sc, 1, 0.1, 9), std::invalid_argument);
  CHECK_THROWS_AS(crdt::rollout(model, sc, 1, 0.1, 0), std::invalid_argument);
}

TEST_CASE("evaluate defaults the target RTG to the best dataset return") {
  const Scenario sc = tiny_scenario();
  const BehaviorPolicy policy{BehaviorPolicy::Kind::noisy, 0.3};
  const Dataset ds = generate_dataset(policy, sc, "hash", 5, 3);
  crdt::TrainConfig tc;
  tc.context_len = 4;
  tc.batch = 2;
  tc.critic_width = 16;
  crdt::DtConfig mc;
  mc.hidden_dim = 16;
  mc.n_layers = 1;
  mc.n_heads = 2;
  mc.context_len = 4;
  crdt::CrdtTrainer trainer(sc, ds, mc, tc);
  CHECK(trainer.model().config().target_rtg_default == ds.max_return());
  CHECK(trainer.model().config().rtg_scale == ds.meta.reward_norm);
  const crdt::EvalStats stats = trainer.evaluate(2);
  CHECK(std::isfinite(stats.return_mean));
  CHECK(stats.efficiency_bits_per_j >= 0.0);
}
