// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "uavdc/critic.hpp"
#include "uavdc/dt_model.hpp"
#include "uavdc/nn.hpp"

namespace uavdc::nn {

// Central finite differences against reverse-mode gradients, swept over
// every scalar of every parameter in the store. The numeric side only ever
// calls the forward pass, so it stays independent of the backward code it
// is checking.
inline double gradcheck_max_rel_error(ParamStore& store,
                                      const std::function<ad::Var()>& loss_fn, double h = 1e-5) {
  ad::Var loss = loss_fn();
  store.zero_grad();
  ad::backward(loss);
  std::vector<ad::Tensor> analytic;
  for (const ad::Var& p : store.all()) {
    analytic.push_back(p->grad_alloc ? p->grad : ad::Tensor(p->value.rows(), p->value.cols()));
  }

  double worst = 0.0;
  for (std::size_t i = 0; i < store.all().size(); ++i) {
    const ad::Var& p = store.all()[i];
    for (std::size_t k = 0; k < p->value.size(); ++k) {
      const double orig = p->value.vec()[k];
      p->value.vec()[k] = orig + h;
      const double up = loss_fn()->value(0, 0);
      p->value.vec()[k] = orig - h;
      const double down = loss_fn()->value(0, 0);
      p->value.vec()[k] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double exact = analytic[i].vec()[k];
      const double err = std::abs(numeric - exact) /
                         std::max({1.0, std::abs(numeric), std::abs(exact)});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

struct GradCheckCase {
  std::string layer;
  double max_rel_error = 0.0;
};

// One small fixture per layer type; returns the worst finite-difference
// error for each.
inline std::vector<GradCheckCase> run_layer_gradchecks() {
  std::vector<GradCheckCase> results;
  Rng data_rng(424242);

  auto random_const = [&](std::size_t r, std::size_t c) {
    ad::Tensor t(r, c);
    for (double& v : t.vec()) v = data_rng.normal(0.0, 1.0);
    return ad::constant(std::move(t), "x");
  };

  auto sum_sq = [](const ad::Var& y) { return ad::sum_all(ad::hadamard(y, y)); };

  {
    ParamStore store(1);
    const Linear lin = Linear::create(store, "linear", 5, 4);
    const ad::Var x = random_const(3, 5);
    results.push_back({"linear", gradcheck_max_rel_error(store, [&] { return sum_sq(lin(x)); })});
  }
  {
    ParamStore store(2);
    const LayerNorm ln = LayerNorm::create(store, "ln", 6);
    const ad::Var x = random_const(4, 6);
    results.push_back({"layernorm", gradcheck_max_rel_error(store, [&] { return sum_sq(ln(x)); })});
  }
  {
    ParamStore store(3);
    const CausalSelfAttention attn = CausalSelfAttention::create(store, "attn", 8, 2, 0, 32.0);
    const ad::Var x = random_const(5, 8);
    ad::Tensor mask(5, 5);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j <= i; ++j) mask(i, j) = 1.0;
    }
    results.push_back(
        {"attention", gradcheck_max_rel_error(store, [&] { return sum_sq(attn(x, mask)); })});
  }
  {
    ParamStore store(4);
    const Linear lin = Linear::create(store, "gelu_lin", 4, 4);
    const ad::Var x = random_const(3, 4);
    results.push_back(
        {"gelu", gradcheck_max_rel_error(store, [&] { return sum_sq(ad::gelu(lin(x))); })});
  }
  {
    ParamStore store(5);
    const Linear lin = Linear::create(store, "mish_lin", 4, 4);
    const ad::Var x = random_const(3, 4);
    results.push_back(
        {"mish", gradcheck_max_rel_error(store, [&] { return sum_sq(ad::mish(lin(x))); })});
  }
  {
    ParamStore store(6);
    LoraLinear lora;
    lora.base = Linear::create(store, "lora_lin", 6, 6);
    lora.adapter = LoraAdapter::create(store, "lora_lin", 6, 6, 2, 32.0);
    // give the zero-initialized up-projection nonzero values so its path
    // carries gradient signal both ways
    Rng fill(9);
    for (double& v : lora.adapter->up->value.vec()) v = fill.normal(0.0, 0.05);
    const ad::Var x = random_const(3, 6);
    results.push_back(
        {"lora_path", gradcheck_max_rel_error(store, [&] { return sum_sq(lora(x)); })});
  }
  {
    ParamStore store(7);
    const MishMlp critic = MishMlp::create(store, "critic", 7, 8, 3, 1);
    const ad::Var x = random_const(4, 7);
    results.push_back(
        {"critic_mlp", gradcheck_max_rel_error(store, [&] { return sum_sq(critic(x)); })});
  }
  {
    // End-to-end: the full DT stack on a two-step segment.
    crdt::DtConfig cfg;
    cfg.state_dim = 6;
    cfg.hidden_dim = 8;
    cfg.n_layers = 1;
    cfg.n_heads = 2;
    cfg.context_len = 2;
    cfg.max_timestep = 4;
    cfg.lora_rank = 2;
    cfg.init_seed = 11;
    crdt::DtModel model(cfg);
    crdt::Segment seg;
    seg.context = 2;
    seg.valid = 2;
    seg.rtg = {0.9, 0.5};
    seg.states.resize(2 * cfg.state_dim);
    for (double& v : seg.states) v = data_rng.uniform01();
    seg.actions = {0.2, 0.4, 0.6, 0.3, 0.7, 0.1};
    seg.rewards = {0.4, 0.5};
    seg.timesteps = {1, 2};
    results.push_back({"dt_stack", gradcheck_max_rel_error(model.params(), [&] {
                         const ad::Var out = model.forward(seg);
                         return ad::sum_all(ad::hadamard(out, out));
                       })});
  }
  return results;
}

}  // namespace uavdc::nn
