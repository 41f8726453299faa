// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "uavdc/critic.hpp"
#include "uavdc/datasets.hpp"
#include "uavdc/dt_model.hpp"
#include "uavdc/optim.hpp"
#include "uavdc/rollout.hpp"
#include "uavdc/scenario.hpp"

namespace uavdc::crdt {

// Defaults are the desk-scale recipe: a small from-scratch backbone with a
// faster-tracking target loop than the full-scale setup (the "paper"
// preset restores the published values).
struct TrainConfig {
  std::size_t context_len = 20;
  double lambda_reg = 1.0;  // weight of the critic regularizer
  double rho_soft = 0.02;   // target-network mixing coefficient
  double gamma = 0.9;
  std::size_t batch = 32;
  std::size_t epochs = 600;
  double policy_lr = 3e-4;
  double critic_lr = 1e-3;
  double weight_decay = 1e-4;
  std::size_t critic_width = 128;
  std::size_t critic_hidden_layers = 3;
  bool critics_enabled = true;
  bool freeze_backbone = false;
  std::uint64_t seed = 1;
  std::size_t eval_every = 0;  // 0 disables periodic evaluation
  std::size_t eval_episodes = 1;

  void validate() const {
    if (context_len == 0) throw ValidationError("context length must be >= 1");
    if (lambda_reg < 0.0) throw ValidationError("lambda must be nonnegative");
    if (!(rho_soft > 0.0) || rho_soft > 1.0) throw ValidationError("rho must be in (0,1]");
    if (gamma < 0.0 || gamma > 1.0) throw ValidationError("gamma must be in [0,1]");
    if (batch == 0 || epochs == 0) throw ValidationError("batch and epochs must be >= 1");
  }
};

struct EvalStats {
  double return_mean = 0.0;
  double return_std = 0.0;
  double efficiency_bits_per_j = 0.0;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double dt_loss = 0.0;        // batch-mean trajectory-modeling loss
  double q_regularizer = 0.0;  // batch-mean lambda * sum_i Q1(s_i, a_hat_i)
  double critic1_loss = 0.0;
  double critic2_loss = 0.0;
  bool has_eval = false;
  EvalStats eval;
  std::vector<std::string> phase_log;  // update ordering within the epoch
};

// Sum-of-squares action loss over valid steps (batch mean applied later).
inline Var dt_loss(const Var& predicted, const Var& target) {
  const Var diff = ad::sub(predicted, target);
  return ad::sum_all(ad::hadamard(diff, diff));
}

// The two per-segment pieces of the value-regularized policy loss:
// the action-regression term and (when a critic is supplied) the summed
// Q(s_i, a_hat_i) along the window, with gradients flowing through the
// predicted actions into the policy only.
struct PolicyLossTerms {
  Var dt;      // sum of squared action gaps over valid steps
  Var q_sum;   // null when no critic is attached
};

inline PolicyLossTerms regularized_dt_terms(const DtModel& model, const Critic* q1,
                                            const Segment& seg) {
  PolicyLossTerms terms;
  const Var pred = model.forward(seg);
  std::vector<std::size_t> valid_rows;
  for (std::size_t p = seg.first_valid(); p < seg.context; ++p) valid_rows.push_back(p);
  const Var pred_valid = ad::gather_rows(pred, valid_rows);

  const std::size_t state_dim = model.config().state_dim;
  std::vector<double> target_vals;
  for (std::size_t p = seg.first_valid(); p < seg.context; ++p) {
    for (std::size_t c = 0; c < 3; ++c) target_vals.push_back(seg.actions[p * 3 + c]);
  }
  const Var targets = ad::constant(Tensor::from_rows(valid_rows.size(), 3, std::move(target_vals)));
  terms.dt = dt_loss(pred_valid, targets);

  if (q1 != nullptr) {
    std::vector<double> state_vals;
    for (std::size_t p = seg.first_valid(); p < seg.context; ++p) {
      state_vals.insert(state_vals.end(),
                        seg.states.begin() + static_cast<std::ptrdiff_t>(p * state_dim),
                        seg.states.begin() + static_cast<std::ptrdiff_t>((p + 1) * state_dim));
    }
    const Var states =
        ad::constant(Tensor::from_rows(valid_rows.size(), state_dim, std::move(state_vals)));
    terms.q_sum = ad::sum_all(q1->forward_rows(ad::concat_cols({states, pred_valid})));
  }
  return terms;
}

// n-step targets: rewards[i..] discounted plus a bootstrap from the final
// state. rewards excludes the final step's reward; its value enters only
// through the bootstrap term.
inline std::vector<double> td_targets(const std::vector<double>& rewards, double gamma,
                                      double bootstrap_q) {
  const std::size_t n = rewards.size();
  std::vector<double> targets(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    double g = 1.0;
    for (std::size_t j = i; j < n; ++j) {
      acc += g * rewards[j];
      g *= gamma;
    }
    targets[i] = acc + g * bootstrap_q;
  }
  return targets;
}

// Builds the K-step training window ending at end_step (1-based), left-
// padding and masking when the trajectory prefix is shorter than K.
inline Segment make_training_segment(const Trajectory& traj, std::size_t end_step,
                                     const DtModel& model, std::size_t context_len) {
  if (end_step == 0 || end_step > traj.steps.size()) {
    throw std::invalid_argument("segment end outside the trajectory");
  }
  const DtConfig& cfg = model.config();
  const std::size_t k = context_len;
  Segment seg;
  seg.context = k;
  seg.valid = std::min(k, end_step);
  seg.last_action_valid = true;
  seg.rtg.assign(k, 0.0);
  seg.states.assign(k * cfg.state_dim, 0.0);
  seg.actions.assign(k * 3, 0.0);
  seg.rewards.assign(k, 0.0);
  seg.timesteps.assign(k, 0);
  for (std::size_t p = seg.first_valid(); p < k; ++p) {
    const std::size_t g = end_step - (k - p);  // 0-based trajectory index
    const TrajectoryStep& step = traj.steps[g];
    if (step.state.size() != cfg.state_dim) throw std::invalid_argument("state size mismatch");
    seg.timesteps[p] = g + 1;
    seg.rtg[p] = step.rtg / cfg.rtg_scale;
    seg.rewards[p] = step.reward / cfg.rtg_scale;
    std::copy(step.state.begin(), step.state.end(),
              seg.states.begin() + static_cast<std::ptrdiff_t>(p * cfg.state_dim));
    const UavAction raw{step.action[0], step.action[1], step.action[2]};
    const std::array<double, 3> norm = model.normalize_action(raw);
    for (std::size_t c = 0; c < 3; ++c) seg.actions[p * 3 + c] = norm[c];
  }
  return seg;
}

// Critic-regularized decision-transformer training. One epoch:
// sample B segments, fit both critics to n-step targets bootstrapped
// through the target policy and target critics, update the policy with the
// value-regularized loss, then soft-update every target network.
class CrdtTrainer {
 public:
  CrdtTrainer(const Scenario& scenario, const Dataset& dataset, DtConfig model_cfg,
              TrainConfig train_cfg)
      : scenario_(scenario),
        dataset_(dataset),
        train_cfg_(train_cfg),
        rng_(train_cfg.seed) {
    train_cfg_.validate();
    if (dataset_.trajectories.empty()) throw ValidationError("training dataset is empty");

    model_cfg.state_dim = observation_size(scenario_);
    model_cfg.context_len = std::max(model_cfg.context_len, train_cfg_.context_len);
    model_cfg.max_timestep = std::max(model_cfg.max_timestep, scenario_.episode.horizon);
    model_cfg.rtg_scale = dataset_.meta.reward_norm;
    model_cfg.target_rtg_default = dataset_.max_return();
    model_cfg.action_high = {2.0 * M_PI, scenario_.sim.max_speed_mps, scenario_.sim.slot_len_s};

    model_ = std::make_unique<DtModel>(model_cfg);
    target_model_ = std::make_unique<DtModel>(model_cfg);
    target_model_->params().restore(model_->params().snapshot());

    CriticConfig critic_cfg;
    critic_cfg.state_dim = model_cfg.state_dim;
    critic_cfg.width = train_cfg_.critic_width;
    critic_cfg.n_hidden = train_cfg_.critic_hidden_layers;
    critic_cfg.init_seed = model_cfg.init_seed;
    critics_ = std::make_unique<CriticPair>(critic_cfg);

    policy_opt_ = std::make_unique<nn::AdamW>(
        model_->trainable_params(train_cfg_.freeze_backbone),
        nn::AdamWConfig{train_cfg_.policy_lr, 0.9, 0.999, 1e-8, train_cfg_.weight_decay});
    critic1_opt_ = std::make_unique<nn::AdamW>(
        critics_->q1.params().all(),
        nn::AdamWConfig{train_cfg_.critic_lr, 0.9, 0.999, 1e-8, train_cfg_.weight_decay});
    critic2_opt_ = std::make_unique<nn::AdamW>(
        critics_->q2.params().all(),
        nn::AdamWConfig{train_cfg_.critic_lr, 0.9, 0.999, 1e-8, train_cfg_.weight_decay});
  }

  EpochMetrics run_epoch() {
    EpochMetrics metrics;
    metrics.epoch = ++epoch_;

    // line 5-6: sample B trajectories and one segment end per trajectory
    std::vector<Segment> segments;
    segments.reserve(train_cfg_.batch);
    for (std::size_t b = 0; b < train_cfg_.batch; ++b) {
      const Trajectory& traj = dataset_.trajectories[rng_.uniform_index(dataset_.trajectories.size())];
      const std::size_t end_step = 1 + rng_.uniform_index(traj.steps.size());
      segments.push_back(make_training_segment(traj, end_step, *model_, train_cfg_.context_len));
    }

    if (train_cfg_.critics_enabled) {
      update_critics(segments, metrics);
      metrics.phase_log.push_back("critic_update");
    }

    update_policy(segments, metrics);
    metrics.phase_log.push_back("policy_update");

    if (train_cfg_.critics_enabled) {
      nn::soft_update(target_model_->params(), model_->params(), train_cfg_.rho_soft);
      critics_->soft_update_targets(train_cfg_.rho_soft);
      metrics.phase_log.push_back("soft_update");
    }

    if (train_cfg_.eval_every > 0 && metrics.epoch % train_cfg_.eval_every == 0) {
      metrics.eval = evaluate(train_cfg_.eval_episodes);
      metrics.has_eval = true;
    }
    history_.push_back(metrics);
    return metrics;
  }

  std::vector<EpochMetrics> train() {
    for (std::size_t e = epoch_; e < train_cfg_.epochs; ++e) run_epoch();
    return history_;
  }

  EvalStats evaluate(std::size_t episodes) const {
    EvalStats stats;
    if (episodes == 0) return stats;
    std::vector<double> returns;
    double collected = 0.0, energy = 0.0;
    for (std::size_t e = 0; e < episodes; ++e) {
      const RolloutResult r = rollout(*model_, scenario_, derive_seed(train_cfg_.seed, 7000 + e),
                                      model_->config().target_rtg_default, train_cfg_.context_len);
      returns.push_back(r.realized_return);
      collected += r.collected_bits;
      energy += r.energy_j;
    }
    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= static_cast<double>(returns.size());
    double var = 0.0;
    for (double r : returns) var += (r - mean) * (r - mean);
    var /= static_cast<double>(returns.size());
    stats.return_mean = mean;
    stats.return_std = std::sqrt(var);
    stats.efficiency_bits_per_j = energy > 0.0 ? collected / energy : 0.0;
    return stats;
  }

  // Held-out action-prediction error (mean squared error per action
  // component, normalized space) over fixed segment ends.
  double action_mse(const std::vector<Trajectory>& trajectories) const {
    double total = 0.0;
    std::size_t count = 0;
    for (const Trajectory& traj : trajectories) {
      for (std::size_t end = 1; end <= traj.steps.size(); end += 7) {
        const Segment seg = make_training_segment(traj, end, *model_, train_cfg_.context_len);
        const Tensor pred = model_->predict_all_norm(seg);
        for (std::size_t p = seg.first_valid(); p < seg.context; ++p) {
          for (std::size_t c = 0; c < 3; ++c) {
            const double d = pred(p, c) - seg.actions[p * 3 + c];
            total += d * d;
            ++count;
          }
        }
      }
    }
    return count > 0 ? total / static_cast<double>(count) : 0.0;
  }

  DtModel& model() { return *model_; }
  const DtModel& model() const { return *model_; }
  DtModel& target_model() { return *target_model_; }
  CriticPair& critics() { return *critics_; }
  const TrainConfig& config() const { return train_cfg_; }
  const std::vector<EpochMetrics>& history() const { return history_; }
  const Scenario& scenario() const { return scenario_; }
  const Dataset& dataset() const { return dataset_; }

 private:
  // Algorithm lines 7-9: bootstrap through the target policy and target
  // critics, then fit both online critics to the same frozen targets.
  void update_critics(const std::vector<Segment>& segments, EpochMetrics& metrics) {
    std::vector<double> flat_rows;
    std::vector<double> flat_targets;
    std::size_t n_rows = 0;
    const std::size_t in_dim = model_->config().state_dim + 3;

    for (const Segment& seg : segments) {
      if (seg.valid < 2) continue;  // TD targets need at least two real steps
      const std::array<double, 3> boot_action = target_model_->predict_last_norm(seg);
      std::vector<double> final_state(
          seg.states.begin() + static_cast<std::ptrdiff_t>((seg.context - 1) * model_->config().state_dim),
          seg.states.begin() + static_cast<std::ptrdiff_t>(seg.context * model_->config().state_dim));
      const double bootstrap = critics_->min_target_value(final_state, boot_action);

      std::vector<double> rewards;
      for (std::size_t p = seg.first_valid(); p + 1 < seg.context; ++p) rewards.push_back(seg.rewards[p]);
      const std::vector<double> targets = td_targets(rewards, train_cfg_.gamma, bootstrap);

      for (std::size_t i = 0; i < targets.size(); ++i) {
        const std::size_t p = seg.first_valid() + i;
        flat_rows.insert(flat_rows.end(),
                         seg.states.begin() + static_cast<std::ptrdiff_t>(p * model_->config().state_dim),
                         seg.states.begin() + static_cast<std::ptrdiff_t>((p + 1) * model_->config().state_dim));
        flat_rows.insert(flat_rows.end(), seg.actions.begin() + static_cast<std::ptrdiff_t>(p * 3),
                         seg.actions.begin() + static_cast<std::ptrdiff_t>((p + 1) * 3));
        flat_targets.push_back(targets[i]);
        ++n_rows;
      }
    }
    if (n_rows == 0) return;

    const Var rows = ad::constant(Tensor::from_rows(n_rows, in_dim, std::move(flat_rows)));
    const Var targets = ad::constant(Tensor::from_rows(n_rows, 1, std::move(flat_targets)));
    const double inv_b = 1.0 / static_cast<double>(train_cfg_.batch);

    for (int h = 0; h < 2; ++h) {
      Critic& critic = h == 0 ? critics_->q1 : critics_->q2;
      nn::AdamW& opt = h == 0 ? *critic1_opt_ : *critic2_opt_;
      const Var diff = ad::sub(critic.forward_rows(rows), targets);
      const Var loss = ad::scale(ad::sum_all(ad::hadamard(diff, diff)), inv_b);
      opt.zero_grad();
      ad::backward(loss);
      opt.step();
      (h == 0 ? metrics.critic1_loss : metrics.critic2_loss) = loss->value(0, 0);
    }
  }

  // Algorithm lines 10-11: value-regularized action regression.
  void update_policy(const std::vector<Segment>& segments, EpochMetrics& metrics) {
    const double inv_b = 1.0 / static_cast<double>(train_cfg_.batch);
    const bool with_q = train_cfg_.critics_enabled && train_cfg_.lambda_reg > 0.0;
    std::vector<Var> dt_terms;
    std::vector<Var> q_terms;

    for (const Segment& seg : segments) {
      const PolicyLossTerms terms =
          regularized_dt_terms(*model_, with_q ? &critics_->q1 : nullptr, seg);
      dt_terms.push_back(terms.dt);
      if (terms.q_sum) q_terms.push_back(terms.q_sum);
    }

    Var loss = ad::scale(ad::sum_all(ad::concat_cols(dt_terms)), inv_b);
    metrics.dt_loss = loss->value(0, 0);
    if (!q_terms.empty()) {
      const Var q_sum = ad::scale(ad::sum_all(ad::concat_cols(q_terms)), inv_b * train_cfg_.lambda_reg);
      metrics.q_regularizer = q_sum->value(0, 0);
      loss = ad::sub(loss, q_sum);
    }

    policy_opt_->zero_grad();
    critics_->q1.params().zero_grad();  // regularizer gradients park here; discard them
    ad::backward(loss);
    policy_opt_->step();
  }

  Scenario scenario_;
  Dataset dataset_;
  TrainConfig train_cfg_;
  Rng rng_;
  std::unique_ptr<DtModel> model_;
  std::unique_ptr<DtModel> target_model_;
  std::unique_ptr<CriticPair> critics_;
  std::unique_ptr<nn::AdamW> policy_opt_;
  std::unique_ptr<nn::AdamW> critic1_opt_;
  std::unique_ptr<nn::AdamW> critic2_opt_;
  std::size_t epoch_ = 0;
  std::vector<EpochMetrics> history_;
};

}  // namespace uavdc::crdt
