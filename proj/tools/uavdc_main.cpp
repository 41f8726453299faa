// SPDX-License-Identifier: Apache-2.0
//
// Operator CLI for the UAV data-collection stack: scenario and dataset
// generation, training, evaluation, allocator comparison, gradient checks,
// and configuration sweeps. Every command is deterministic given its seed.

#include <CLI11.hpp>

#include <iostream>

#include "uavdc/cli_commands.hpp"

using namespace uavdc;

int main(int argc, char** argv) {
  CLI::App app{"UAV-enabled IoT data collection: simulator, optimal RB allocator, "
               "and critic-regularized decision-transformer training"};
  app.require_subcommand(1);

  cli::ScenarioGenOptions scen;
  CLI::App* scenario_gen = app.add_subcommand("scenario-gen", "Write a scenario file");
  scenario_gen->add_option("--preset", scen.preset, "desk or paper")->capture_default_str();
  scenario_gen->add_option("--override", scen.overrides, "section.key=value (repeatable)");
  scenario_gen->add_option("--out", scen.out_path, "output path")->required();

  cli::DatasetGenOptions dgen;
  CLI::App* dataset_gen = app.add_subcommand("dataset-gen", "Roll out a behavior policy");
  dataset_gen->add_option("--scenario", dgen.scenario_path, "scenario file")->required();
  dataset_gen->add_option("--policy", dgen.policy, "greedy_nearest, noisy, or random")
      ->capture_default_str();
  dataset_gen->add_option("--sigma", dgen.sigma, "noise level for the noisy policy")
      ->capture_default_str();
  dataset_gen->add_option("--episodes", dgen.episodes, "episode count")->capture_default_str();
  dataset_gen->add_option("--seed", dgen.seed, "master seed")->capture_default_str();
  dataset_gen->add_option("--out", dgen.out_path, "output path")->required();

  cli::TrainOptions train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train the policy on an offline dataset");
  train_cmd->add_option("--scenario", train.scenario_path, "scenario file")->required();
  train_cmd->add_option("--dataset", train.dataset_path, "dataset file")->required();
  train_cmd->add_option("--out", train.out_dir, "output directory")->required();
  train_cmd->add_option("--preset", train.preset, "desk or paper")->capture_default_str();
  train_cmd->add_option("--override", train.overrides, "train.*/model.* key=value (repeatable)");
  train_cmd->add_option("--seed", train.seed, "training seed")->capture_default_str();
  train_cmd->add_option("--init-from", train.init_from, "checkpoint to initialize from");
  train_cmd->add_flag("--allow-scenario-mismatch", train.allow_scenario_mismatch,
                      "train on a dataset generated from a different scenario");

  cli::EvalOptions eval;
  double eval_rtg = 0.0;
  std::size_t eval_ctx = 0;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Roll out a trained policy");
  eval_cmd->add_option("--checkpoint", eval.checkpoint_path, "model checkpoint")->required();
  eval_cmd->add_option("--scenario", eval.scenario_path, "scenario file")->required();
  eval_cmd->add_option("--episodes", eval.episodes, "episode count")->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed, "evaluation seed")->capture_default_str();
  CLI::Option* rtg_opt = eval_cmd->add_option("--target-rtg", eval_rtg, "conditioning return (bits/J)");
  CLI::Option* ctx_opt = eval_cmd->add_option("--context", eval_ctx, "inference context length");
  eval_cmd->add_option("--out", eval.out_path, "per-episode CSV path");

  cli::CompareAllocatorsOptions cmp;
  CLI::App* cmp_cmd = app.add_subcommand("compare-allocators",
                                         "Score allocators per slot along scripted trajectories");
  cmp_cmd->add_option("--scenario", cmp.scenario_path, "scenario file")->required();
  cmp_cmd->add_option("--trajectories", cmp.trajectories, "scripted trajectory count")
      ->capture_default_str();
  cmp_cmd->add_option("--seed", cmp.seed, "script seed")->capture_default_str();
  cmp_cmd->add_option("--out", cmp.out_path, "CSV path")->required();

  CLI::App* gradcheck_cmd =
      app.add_subcommand("gradcheck", "Finite-difference check of every layer type");

  cli::SweepOptions sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Train across LoRA ranks or context lengths");
  sweep_cmd->add_option("--kind", sweep.kind, "lora-rank or context")->capture_default_str();
  sweep_cmd->add_option("--scenario", sweep.scenario_path, "scenario file")->required();
  sweep_cmd->add_option("--dataset", sweep.dataset_path, "dataset file")->required();
  sweep_cmd->add_option("--checkpoint", sweep.checkpoint_path, "backbone checkpoint (lora-rank)");
  sweep_cmd->add_option("--values", sweep.values, "swept values, comma-separated")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--preset", sweep.preset, "desk or paper")->capture_default_str();
  sweep_cmd->add_option("--override", sweep.overrides, "train.*/model.* key=value (repeatable)");
  sweep_cmd->add_option("--seed", sweep.seed, "training seed")->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out_path, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*scenario_gen) return cli::cmd_scenario_gen(scen);
    if (*dataset_gen) return cli::cmd_dataset_gen(dgen);
    if (*train_cmd) return cli::cmd_train(train);
    if (*eval_cmd) {
      if (rtg_opt->count() > 0) eval.target_rtg = eval_rtg;
      if (ctx_opt->count() > 0) eval.context_len = eval_ctx;
      return cli::cmd_eval(eval);
    }
    if (*cmp_cmd) return cli::cmd_compare_allocators(cmp);
    if (*gradcheck_cmd) return cli::cmd_gradcheck();
    if (*sweep_cmd) return cli::cmd_sweep(sweep);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
