// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uavdc/allocator_compare.hpp"
#include "uavdc/checkpoint.hpp"
#include "uavdc/datasets.hpp"
#include "uavdc/gradcheck.hpp"
#include "uavdc/scenario.hpp"
#include "uavdc/trainer.hpp"

namespace uavdc::cli {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Hyperparameter presets. "desk" trains a small from-scratch backbone in
// minutes on a CPU; "paper" pins the full-scale settings (GPT-2-sized
// backbone, K=20, r=16, alpha=32, B=128, rho=0.005, lambda=1, lr=1e-5).
struct RunConfig {
  crdt::DtConfig model;
  crdt::TrainConfig train;

  static RunConfig preset(const std::string& name) {
    RunConfig rc;
    if (name == "desk") {
      return rc;  // struct defaults are the desk preset
    }
    if (name == "paper") {
      rc.model.hidden_dim = 768;
      rc.model.n_layers = 12;
      rc.model.n_heads = 12;
      rc.model.lora_rank = 16;
      rc.model.lora_alpha = 32.0;
      rc.train.context_len = 20;
      rc.train.batch = 128;
      rc.train.epochs = 1000;
      rc.train.policy_lr = 1e-5;
      rc.train.critic_lr = 1e-5;
      rc.train.lambda_reg = 1.0;
      rc.train.rho_soft = 0.005;
      rc.train.gamma = 0.99;
      rc.train.critic_width = 512;
      rc.train.freeze_backbone = true;
      return rc;
    }
    throw ValidationError("unknown preset '" + name + "' (expected desk or paper)");
  }

  // Applies "section.key=value" overrides; unknown keys are rejected.
  void apply_override(const std::string& spec) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos) throw ValidationError("override must look like key=value: " + spec);
    const std::string key = spec.substr(0, eq);
    const std::string value = spec.substr(eq + 1);
    auto as_size = [&] { return static_cast<std::size_t>(std::stoull(value)); };
    auto as_double = [&] { return std::stod(value); };
    auto as_bool = [&] {
      if (value == "true" || value == "1") return true;
      if (value == "false" || value == "0") return false;
      throw ValidationError("boolean override expects true/false: " + spec);
    };

    if (key == "model.hidden_dim") model.hidden_dim = as_size();
    else if (key == "model.n_layers") model.n_layers = as_size();
    else if (key == "model.n_heads") model.n_heads = as_size();
    else if (key == "model.ff_mult") model.ff_mult = as_size();
    else if (key == "model.lora_rank") model.lora_rank = as_size();
    else if (key == "model.lora_alpha") model.lora_alpha = as_double();
    else if (key == "model.init_seed") model.init_seed = std::stoull(value);
    else if (key == "train.context_len") train.context_len = as_size();
    else if (key == "train.lambda") train.lambda_reg = as_double();
    else if (key == "train.rho") train.rho_soft = as_double();
    else if (key == "train.gamma") train.gamma = as_double();
    else if (key == "train.batch") train.batch = as_size();
    else if (key == "train.epochs") train.epochs = as_size();
    else if (key == "train.policy_lr") train.policy_lr = as_double();
    else if (key == "train.critic_lr") train.critic_lr = as_double();
    else if (key == "train.weight_decay") train.weight_decay = as_double();
    else if (key == "train.critic_width") train.critic_width = as_size();
    else if (key == "train.critic_hidden_layers") train.critic_hidden_layers = as_size();
    else if (key == "train.critics") train.critics_enabled = as_bool();
    else if (key == "train.freeze_backbone") train.freeze_backbone = as_bool();
    else if (key == "train.eval_every") train.eval_every = as_size();
    else if (key == "train.eval_episodes") train.eval_episodes = as_size();
    else throw ValidationError("unknown override key '" + key + "'");
  }
};

// ---------------------------------------------------------------- scenario

struct ScenarioGenOptions {
  std::string preset = "desk";
  std::vector<std::string> overrides;  // JSON-path overrides, section.key=value
  std::string out_path;
};

inline int cmd_scenario_gen(const ScenarioGenOptions& opt, std::ostream& log = std::cout) {
  Scenario sc = opt.preset == "paper" ? Scenario::paper_default() : Scenario::desk_default();
  if (opt.preset != "paper" && opt.preset != "desk") {
    throw ValidationError("unknown preset '" + opt.preset + "'");
  }
  nlohmann::json j = scenario_to_json(sc);
  for (const std::string& ov : opt.overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos) throw ValidationError("override must look like key=value: " + ov);
    const std::string key = ov.substr(0, eq);
    const std::string value = ov.substr(eq + 1);
    const std::size_t dot = key.find('.');
    if (dot == std::string::npos) throw ValidationError("scenario overrides use section.key: " + ov);
    const std::string section = key.substr(0, dot);
    const std::string field = key.substr(dot + 1);
    if (!j.contains(section) || !j.at(section).contains(field)) {
      throw ValidationError("unknown scenario key '" + key + "'");
    }
    nlohmann::json& slot = j[section][field];
    if (slot.is_boolean()) slot = value == "true" || value == "1";
    else if (slot.is_number_unsigned() && value.find_first_of(".eE-") == std::string::npos)
      slot = std::stoull(value);
    else slot = std::stod(value);
  }
  sc = scenario_from_json(j);  // validates
  save_scenario(opt.out_path, sc);

  std::ifstream in(opt.out_path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  log << "scenario written: " << opt.out_path << "\n";
  log << "scenario hash: " << scenario_content_hash(buf.str()) << "\n";
  return 0;
}

// ----------------------------------------------------------------- dataset

struct DatasetGenOptions {
  std::string scenario_path;
  std::string policy = "greedy_nearest";  // greedy_nearest | noisy | random
  double sigma = 0.3;
  std::size_t episodes = 200;
  std::uint64_t seed = 1;
  std::string out_path;
};

inline int cmd_dataset_gen(const DatasetGenOptions& opt, std::ostream& log = std::cout) {
  std::string hash;
  const Scenario sc = load_scenario(opt.scenario_path, &hash);
  BehaviorPolicy policy;
  if (opt.policy == "greedy_nearest") policy.kind = BehaviorPolicy::Kind::greedy_nearest;
  else if (opt.policy == "noisy") {
    policy.kind = BehaviorPolicy::Kind::noisy;
    policy.sigma = opt.sigma;
  } else if (opt.policy == "random") policy.kind = BehaviorPolicy::Kind::random;
  else throw ValidationError("unknown policy '" + opt.policy + "'");

  const Dataset ds = generate_dataset(policy, sc, hash, opt.episodes, opt.seed);
  save_dataset(opt.out_path, ds);

  double mean = 0.0;
  for (const Trajectory& t : ds.trajectories) mean += t.episode_return;
  mean /= static_cast<double>(ds.trajectories.size());
  log << "dataset written: " << opt.out_path << "\n";
  log << "episodes: " << ds.trajectories.size() << ", policy: " << ds.meta.policy_tag
      << ", mean return: " << fmt17(mean) << " bits/J, reward_norm: " << fmt17(ds.meta.reward_norm)
      << "\n";
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainOptions {
  std::string scenario_path;
  std::string dataset_path;
  std::string out_dir;
  std::string preset = "desk";
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  std::string init_from;  // optional checkpoint to start from
  bool allow_scenario_mismatch = false;
};

inline void write_metrics_csv(const std::string& path,
                              const std::vector<crdt::EpochMetrics>& history) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write metrics: " + path);
  f << "epoch,dt_loss,q_regularizer,critic1_loss,critic2_loss,"
       "eval_return_mean,eval_return_std,eval_energy_efficiency\n";
  for (const crdt::EpochMetrics& m : history) {
    f << m.epoch << ',' << fmt17(m.dt_loss) << ',' << fmt17(m.q_regularizer) << ','
      << fmt17(m.critic1_loss) << ',' << fmt17(m.critic2_loss) << ',';
    if (m.has_eval) {
      f << fmt17(m.eval.return_mean) << ',' << fmt17(m.eval.return_std) << ','
        << fmt17(m.eval.efficiency_bits_per_j);
    } else {
      f << ",,";
    }
    f << '\n';
  }
}

inline std::string checkpoint_meta(const crdt::DtModel& model) {
  return crdt::dt_config_to_json(model.config()).dump();
}

inline int cmd_train(const TrainOptions& opt, std::ostream& log = std::cout) {
  std::string scenario_hash;
  const Scenario sc = load_scenario(opt.scenario_path, &scenario_hash);
  const Dataset ds = load_dataset(opt.dataset_path);
  if (ds.meta.scenario_hash != scenario_hash && !opt.allow_scenario_mismatch) {
    throw ValidationError("dataset was generated from a different scenario (hash " +
                          ds.meta.scenario_hash + " vs " + scenario_hash +
                          "); pass --allow-scenario-mismatch to proceed");
  }

  RunConfig rc = RunConfig::preset(opt.preset);
  for (const std::string& ov : opt.overrides) rc.apply_override(ov);
  rc.train.seed = opt.seed;
  if (rc.train.eval_every == 0) rc.train.eval_every = std::max<std::size_t>(rc.train.epochs / 10, 1);

  crdt::CrdtTrainer trainer(sc, ds, rc.model, rc.train);
  if (!opt.init_from.empty()) {
    const nn::Checkpoint ck = nn::load_checkpoint(opt.init_from);
    nn::restore_params(ck, trainer.model().params(), /*allow_missing=*/true);
    trainer.target_model().params().restore(trainer.model().params().snapshot());
    log << "initialized from " << opt.init_from << "\n";
  }

  std::filesystem::create_directories(opt.out_dir);
  for (std::size_t e = 0; e < rc.train.epochs; ++e) {
    const crdt::EpochMetrics m = trainer.run_epoch();
    if (m.has_eval) {
      log << "epoch " << m.epoch << " dt_loss " << fmt17(m.dt_loss) << " eval_return "
          << fmt17(m.eval.return_mean) << "\n";
    }
  }
  const std::string metrics_path = (std::filesystem::path(opt.out_dir) / "metrics.csv").string();
  write_metrics_csv(metrics_path, trainer.history());
  const std::string ckpt_path = (std::filesystem::path(opt.out_dir) / "model.ckpt").string();
  nn::save_checkpoint(ckpt_path, checkpoint_meta(trainer.model()), trainer.model().params());

  const crdt::EvalStats final_eval = trainer.evaluate(rc.train.eval_episodes);
  log << "final eval: return " << fmt17(final_eval.return_mean) << " bits/J, efficiency "
      << fmt17(bits_to_megabytes(final_eval.efficiency_bits_per_j)) << " MB/J\n";
  log << "checkpoint: " << ckpt_path << "\n";
  log << "metrics: " << metrics_path << "\n";
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalOptions {
  std::string checkpoint_path;
  std::string scenario_path;
  std::size_t episodes = 1;
  std::uint64_t seed = 1;
  std::optional<double> target_rtg;
  std::optional<std::size_t> context_len;
  std::string out_path;  // optional CSV
};

inline int cmd_eval(const EvalOptions& opt, std::ostream& log = std::cout) {
  const Scenario sc = load_scenario(opt.scenario_path);
  const nn::Checkpoint ck = nn::load_checkpoint(opt.checkpoint_path);
  const crdt::DtConfig cfg = crdt::dt_config_from_json(nlohmann::json::parse(ck.meta));
  crdt::DtModel model(cfg);
  nn::restore_params(ck, model.params());
  if (observation_size(sc) != cfg.state_dim) {
    throw ValidationError("scenario does not match the checkpoint's observation size");
  }

  const double target = opt.target_rtg.value_or(cfg.target_rtg_default);
  const std::size_t context = opt.context_len.value_or(cfg.context_len);

  std::ofstream csv;
  if (!opt.out_path.empty()) {
    csv.open(opt.out_path, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write eval csv: " + opt.out_path);
    csv << "episode,return_bits_per_j,efficiency_bits_per_j,steps\n";
  }
  double sum = 0.0;
  for (std::size_t e = 0; e < opt.episodes; ++e) {
    const crdt::RolloutResult r =
        crdt::rollout(model, sc, derive_seed(opt.seed, e), target, context);
    sum += r.realized_return;
    if (csv.is_open()) {
      csv << e << ',' << fmt17(r.realized_return) << ',' << fmt17(r.efficiency_bits_per_j()) << ','
          << r.trajectory.steps.size() << '\n';
    }
  }
  log << "mean return over " << opt.episodes
      << " episode(s): " << fmt17(sum / static_cast<double>(opt.episodes)) << " bits/J\n";
  return 0;
}

// ------------------------------------------------------- compare-allocators

struct CompareAllocatorsOptions {
  std::string scenario_path;
  std::size_t trajectories = 20;
  std::uint64_t seed = 1;
  std::string out_path;
};

inline int cmd_compare_allocators(const CompareAllocatorsOptions& opt,
                                  std::ostream& log = std::cout) {
  const Scenario sc = load_scenario(opt.scenario_path);
  const std::vector<AllocatorComparisonRow> rows = compare_allocators(sc, opt.trajectories, opt.seed);
  std::ofstream f(opt.out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write csv: " + opt.out_path);
  f << "trajectory,slot,allocator,collected_bits,energy_j,efficiency_bits_per_j\n";
  std::map<std::string, double> totals;
  for (const AllocatorComparisonRow& r : rows) {
    f << r.trajectory << ',' << r.slot << ',' << r.allocator << ',' << fmt17(r.collected_bits) << ','
      << fmt17(r.energy_j) << ',' << fmt17(r.efficiency_bits_per_j) << '\n';
    totals[r.allocator] += r.collected_bits;
  }
  for (const auto& [name, total] : totals) {
    log << name << ": " << fmt17(bits_to_megabytes(total)) << " MB collected\n";
  }
  log << "csv: " << opt.out_path << "\n";
  return 0;
}

// --------------------------------------------------------------- gradcheck

inline int cmd_gradcheck(std::ostream& log = std::cout) {
  double worst = 0.0;
  for (const nn::GradCheckCase& c : nn::run_layer_gradchecks()) {
    log << c.layer << ": max relative error " << fmt17(c.max_rel_error) << "\n";
    worst = std::max(worst, c.max_rel_error);
  }
  log << "overall max relative error: " << fmt17(worst) << "\n";
  if (worst >= 1e-4) {
    log << "FAIL: tolerance 1e-4 exceeded\n";
    return 1;
  }
  return 0;
}

// ------------------------------------------------------------------- sweep

struct SweepOptions {
  std::string kind = "lora-rank";  // lora-rank | context
  std::string scenario_path;
  std::string dataset_path;
  std::string checkpoint_path;  // backbone to adapt (required for lora-rank)
  std::vector<std::size_t> values;
  std::string preset = "desk";
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  std::string out_path;
};

inline int cmd_sweep(const SweepOptions& opt, std::ostream& log = std::cout) {
  std::string scenario_hash;
  const Scenario sc = load_scenario(opt.scenario_path, &scenario_hash);
  const Dataset ds = load_dataset(opt.dataset_path);
  if (opt.values.empty()) throw ValidationError("sweep needs at least one value");

  std::ofstream csv(opt.out_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write csv: " + opt.out_path);

  if (opt.kind == "lora-rank") {
    if (opt.checkpoint_path.empty()) {
      throw ValidationError("lora-rank sweep needs --checkpoint with a trained backbone");
    }
    const nn::Checkpoint ck = nn::load_checkpoint(opt.checkpoint_path);
    const crdt::DtConfig base_cfg = crdt::dt_config_from_json(nlohmann::json::parse(ck.meta));
    csv << "lora_rank,energy_efficiency_mb_per_j,model_parameters,trainable_parameters_pct\n";
    for (std::size_t rank : opt.values) {
      RunConfig rc = RunConfig::preset(opt.preset);
      for (const std::string& ov : opt.overrides) rc.apply_override(ov);
      rc.model = base_cfg;
      rc.model.lora_rank = rank;
      rc.train.seed = opt.seed;
      rc.train.freeze_backbone = true;
      crdt::CrdtTrainer trainer(sc, ds, rc.model, rc.train);
      nn::restore_params(ck, trainer.model().params(), /*allow_missing=*/true);
      trainer.target_model().params().restore(trainer.model().params().snapshot());
      for (std::size_t e = 0; e < rc.train.epochs; ++e) trainer.run_epoch();
      const crdt::EvalStats stats = trainer.evaluate(rc.train.eval_episodes);
      const std::size_t total = trainer.model().params().count_values();
      const std::size_t trainable = trainer.model().trainable_value_count(true);
      const double pct = 100.0 * static_cast<double>(trainable) / static_cast<double>(total);
      csv << rank << ',' << fmt17(bits_to_megabytes(stats.efficiency_bits_per_j)) << ',' << total
          << ',' << fmt17(pct) << '\n';
      log << "rank " << rank << ": efficiency "
          << fmt17(bits_to_megabytes(stats.efficiency_bits_per_j)) << " MB/J, params " << total
          << ", trainable " << fmt17(pct) << "%\n";
    }
  } else if (opt.kind == "context") {
    csv << "context_len,energy_efficiency_mb_per_j\n";
    for (std::size_t k : opt.values) {
      RunConfig rc = RunConfig::preset(opt.preset);
      for (const std::string& ov : opt.overrides) rc.apply_override(ov);
      rc.train.context_len = k;
      rc.model.context_len = std::max(rc.model.context_len, k);
      rc.train.seed = opt.seed;
      crdt::CrdtTrainer trainer(sc, ds, rc.model, rc.train);
      for (std::size_t e = 0; e < rc.train.epochs; ++e) trainer.run_epoch();
      const crdt::EvalStats stats = trainer.evaluate(rc.train.eval_episodes);
      csv << k << ',' << fmt17(bits_to_megabytes(stats.efficiency_bits_per_j)) << '\n';
      log << "context " << k << ": efficiency "
          << fmt17(bits_to_megabytes(stats.efficiency_bits_per_j)) << " MB/J\n";
    }
  } else {
    throw ValidationError("unknown sweep kind '" + opt.kind + "' (expected lora-rank or context)");
  }
  log << "csv: " << opt.out_path << "\n";
  return 0;
}

}  // namespace uavdc::cli
