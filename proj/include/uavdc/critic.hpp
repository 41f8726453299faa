// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "uavdc/autodiff.hpp"
#include "uavdc/nn.hpp"

namespace uavdc::crdt {

using ad::Tensor;
using ad::Var;

struct CriticConfig {
  std::size_t state_dim = 32;
  std::size_t action_dim = 3;
  std::size_t width = 64;
  std::size_t n_hidden = 3;
  std::uint64_t init_seed = 1;
};

// State-action value network: rows of [state, normalized action] in, one
// scalar per row out.
class Critic {
 public:
  Critic(const CriticConfig& cfg, const std::string& name, std::uint64_t seed_salt)
      : cfg_(cfg), store_(derive_seed(cfg.init_seed, seed_salt)) {
    net_ = nn::MishMlp::create(store_, name, cfg.state_dim + cfg.action_dim, cfg.width,
                               cfg.n_hidden, 1);
  }

  Var forward_rows(const Var& rows) const { return net_(rows); }

  // Value-only evaluation of a single (state, action) pair.
  double value(const std::vector<double>& state, const std::array<double, 3>& action_norm) const {
    std::vector<double> row(state);
    row.insert(row.end(), action_norm.begin(), action_norm.end());
    const std::size_t width = row.size();
    const Var in = ad::constant(Tensor::from_rows(1, width, std::move(row)));
    return net_(in)->value(0, 0);
  }

  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }
  const CriticConfig& config() const { return cfg_; }

 private:
  CriticConfig cfg_;
  nn::ParamStore store_;
  nn::MishMlp net_;
};

// Twin critics with their soft-updated targets. Targets start as exact
// copies of the online networks.
struct CriticPair {
  Critic q1, q2, q1_target, q2_target;

  explicit CriticPair(const CriticConfig& cfg)
      : q1(cfg, "q1", 101), q2(cfg, "q2", 202), q1_target(cfg, "q1", 101), q2_target(cfg, "q2", 202) {
    q1_target.params().restore(q1.params().snapshot());
    q2_target.params().restore(q2.params().snapshot());
  }

  double min_target_value(const std::vector<double>& state,
                          const std::array<double, 3>& action_norm) const {
    return std::min(q1_target.value(state, action_norm), q2_target.value(state, action_norm));
  }

  void soft_update_targets(double rho) {
    nn::soft_update(q1_target.params(), q1.params(), rho);
    nn::soft_update(q2_target.params(), q2.params(), rho);
  }
};

}  // namespace uavdc::crdt
