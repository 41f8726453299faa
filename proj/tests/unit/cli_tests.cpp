// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "uavdc/cli_commands.hpp"

using namespace uavdc;

namespace {

std::filesystem::path tmp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "uavdc_cli_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("run-config presets") {
  const cli::RunConfig desk = cli::RunConfig::preset("desk");
  CHECK(desk.train.context_len == 20);
  CHECK(desk.train.lambda_reg == 1.0);
  CHECK(desk.train.rho_soft == 0.005);

  const cli::RunConfig paper = cli::RunConfig::preset("paper");
  CHECK(paper.model.hidden_dim == 768);
  CHECK(paper.model.n_layers == 12);
  CHECK(paper.model.n_heads == 12);
  CHECK(paper.model.lora_rank == 16);
  CHECK(paper.model.lora_alpha == 32.0);
  CHECK(paper.train.batch == 128);
  CHECK(paper.train.epochs == 1000);
  CHECK(paper.train.policy_lr == 1e-5);
  CHECK(paper.train.rho_soft == 0.005);
  CHECK(paper.train.lambda_reg == 1.0);
  CHECK(paper.train.critic_width == 512);
  CHECK(paper.train.freeze_backbone);

  CHECK_THROWS_AS(cli::RunConfig::preset("huge"), ValidationError);
}

TEST_CASE("overrides are typed and unknown keys are rejected") {
  cli::RunConfig rc = cli::RunConfig::preset("desk");
  rc.apply_override("train.epochs=42");
  rc.apply_override("train.lambda=2.5");
  rc.apply_override("train.critics=false");
  rc.apply_override("model.hidden_dim=16");
  CHECK(rc.train.epochs == 42);
  CHECK(rc.train.lambda_reg == 2.5);
  CHECK(!rc.train.critics_enabled);
  CHECK(rc.model.hidden_dim == 16);

  CHECK_THROWS_AS(rc.apply_override("train.epoch=42"), ValidationError);      // misspelled
  CHECK_THROWS_AS(rc.apply_override("training.epochs=42"), ValidationError);  // wrong section
  CHECK_THROWS_AS(rc.apply_override("train.epochs"), ValidationError);        // no value
  CHECK_THROWS_AS(rc.apply_override("train.critics=yes"), ValidationError);   // bad boolean
}

TEST_CASE("scenario-gen rejects unknown keys and writes a loadable file") {
  const auto dir = tmp_dir();
  std::ostringstream sink;

  cli::ScenarioGenOptions opt;
  opt.preset = "desk";
  opt.overrides = {"devices.count=5", "radio.iota=2.5"};
  opt.out_path = (dir / "scen.json").string();
  CHECK(cli::cmd_scenario_gen(opt, sink) == 0);
  const Scenario sc = load_scenario(opt.out_path);
  CHECK(sc.n_devices == 5);
  CHECK(sc.channel.pathloss_exp == 2.5);

  cli::ScenarioGenOptions bad = opt;
  bad.overrides = {"radio.bandwidth=1"};  // not a key
  CHECK_THROWS_AS(cli::cmd_scenario_gen(bad, sink), ValidationError);
  bad.overrides = {"nonsense"};
  CHECK_THROWS_AS(cli::cmd_scenario_gen(bad, sink), ValidationError);
}

TEST_CASE("train refuses a dataset generated from a different scenario") {
  const auto dir = tmp_dir();
  std::ostringstream sink;

  cli::ScenarioGenOptions sg;
  sg.overrides = {"devices.count=4", "radio.n_rbs=2", "episode.horizon=8"};
  sg.out_path = (dir / "a.json").string();
  cli::cmd_scenario_gen(sg, sink);
  sg.overrides = {"devices.count=4", "radio.n_rbs=2", "episode.horizon=9"};
  sg.out_path = (dir / "b.json").string();
  cli::cmd_scenario_gen(sg, sink);

  cli::DatasetGenOptions dg;
  dg.scenario_path = (dir / "a.json").string();
  dg.policy = "random";
  dg.episodes = 2;
  dg.out_path = (dir / "ds.jsonl").string();
  cli::cmd_dataset_gen(dg, sink);

  cli::TrainOptions tr;
  tr.scenario_path = (dir / "b.json").string();  // mismatched scenario
  tr.dataset_path = dg.out_path;
  tr.out_dir = (dir / "run").string();
  tr.overrides = {"train.epochs=1", "model.hidden_dim=16", "train.batch=2",
                  "train.critic_width=16"};
  CHECK_THROWS_AS(cli::cmd_train(tr, sink), ValidationError);
  tr.allow_scenario_mismatch = true;
  CHECK(cli::cmd_train(tr, sink) == 0);
}

TEST_CASE("eval loads a trained checkpoint and writes a per-episode csv") {
  const auto dir = tmp_dir();
  std::ostringstream sink;

  cli::ScenarioGenOptions sg;
  sg.overrides = {"devices.count=4", "radio.n_rbs=2", "episode.horizon=8"};
  sg.out_path = (dir / "scen_eval.json").string();
  cli::cmd_scenario_gen(sg, sink);

  cli::DatasetGenOptions dg;
  dg.scenario_path = sg.out_path;
  dg.policy = "noisy";
  dg.sigma = 0.4;
  dg.episodes = 3;
  dg.out_path = (dir / "ds_eval.jsonl").string();
  cli::cmd_dataset_gen(dg, sink);

  cli::TrainOptions tr;
  tr.scenario_path = sg.out_path;
  tr.dataset_path = dg.out_path;
  tr.out_dir = (dir / "run_eval").string();
  tr.overrides = {"train.epochs=2", "model.hidden_dim=16", "train.batch=2",
                  "train.critic_width=16"};
  CHECK(cli::cmd_train(tr, sink) == 0);

  cli::EvalOptions ev;
  ev.checkpoint_path = (dir / "run_eval" / "model.ckpt").string();
  ev.scenario_path = sg.out_path;
  ev.episodes = 2;
  ev.out_path = (dir / "eval.csv").string();
  CHECK(cli::cmd_eval(ev, sink) == 0);

  std::ifstream csv(ev.out_path);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "episode,return_bits_per_j,efficiency_bits_per_j,steps");
  std::string row;
  int rows = 0;
  while (std::getline(csv, row)) {
    if (!row.empty()) ++rows;
  }
  CHECK(rows == 2);
}

TEST_CASE("compare-allocators csv has the documented columns") {
  const auto dir = tmp_dir();
  std::ostringstream sink;

  cli::ScenarioGenOptions sg;
  sg.overrides = {"devices.count=5", "radio.n_rbs=2", "episode.horizon=6"};
  sg.out_path = (dir / "scen_cmp.json").string();
  cli::cmd_scenario_gen(sg, sink);

  cli::CompareAllocatorsOptions co;
  co.scenario_path = sg.out_path;
  co.trajectories = 2;
  co.out_path = (dir / "cmp.csv").string();
  CHECK(cli::cmd_compare_allocators(co, sink) == 0);

  std::ifstream csv(co.out_path);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "trajectory,slot,allocator,collected_bits,energy_j,efficiency_bits_per_j");
  std::string row;
  int rows = 0;
  while (std::getline(csv, row)) {
    if (!row.empty()) ++rows;
  }
  CHECK(rows == 2 * 6 * 4);  // trajectories x slots x allocators
}
