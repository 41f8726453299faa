// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavdc/autodiff.hpp"
#include "uavdc/common.hpp"
#include "uavdc/nn.hpp"
#include "uavdc/world.hpp"

namespace uavdc::crdt {

using ad::Tensor;
using ad::Var;

struct DtConfig {
  std::size_t state_dim = 32;
  std::size_t action_dim = 3;
  std::size_t hidden_dim = 32;
  std::size_t n_layers = 2;
  std::size_t n_heads = 2;
  std::size_t ff_mult = 4;
  std::size_t context_len = 20;
  std::size_t max_timestep = 60;  // time-embedding table holds max_timestep+1 rows
  std::size_t lora_rank = 0;      // 0 = no adapters
  double lora_alpha = 32.0;
  double rtg_scale = 1.0;           // dataset reward normalization constant
  double target_rtg_default = 0.0;  // raw units; pinned at training time
  std::array<double, 3> action_high{2.0 * M_PI, 25.0, 5.0};
  std::uint64_t init_seed = 1;

  void validate() const {
    if (state_dim == 0 || hidden_dim == 0 || n_layers == 0 || n_heads == 0) {
      throw ValidationError("model dimensions must be positive");
    }
    if (hidden_dim % n_heads != 0) throw ValidationError("hidden_dim must divide by n_heads");
    if (context_len == 0 || context_len > max_timestep) {
      throw ValidationError("context length must be in [1, max_timestep]");
    }
    if (!(rtg_scale > 0.0)) throw ValidationError("rtg_scale must be positive");
    for (double hi : action_high) {
      if (!(hi > 0.0)) throw ValidationError("action bounds must be positive");
    }
  }
};

inline nlohmann::json dt_config_to_json(const DtConfig& c) {
  return nlohmann::json{{"state_dim", c.state_dim},
                        {"action_dim", c.action_dim},
                        {"hidden_dim", c.hidden_dim},
                        {"n_layers", c.n_layers},
                        {"n_heads", c.n_heads},
                        {"ff_mult", c.ff_mult},
                        {"context_len", c.context_len},
                        {"max_timestep", c.max_timestep},
                        {"lora_rank", c.lora_rank},
                        {"lora_alpha", c.lora_alpha},
                        {"rtg_scale", c.rtg_scale},
                        {"target_rtg_default", c.target_rtg_default},
                        {"action_high", c.action_high},
                        {"init_seed", c.init_seed}};
}

inline DtConfig dt_config_from_json(const nlohmann::json& j) {
  DtConfig c;
  c.state_dim = j.at("state_dim").get<std::size_t>();
  c.action_dim = j.at("action_dim").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.n_layers = j.at("n_layers").get<std::size_t>();
  c.n_heads = j.at("n_heads").get<std::size_t>();
  c.ff_mult = j.at("ff_mult").get<std::size_t>();
  c.context_len = j.at("context_len").get<std::size_t>();
  c.max_timestep = j.at("max_timestep").get<std::size_t>();
  c.lora_rank = j.at("lora_rank").get<std::size_t>();
  c.lora_alpha = j.at("lora_alpha").get<double>();
  c.rtg_scale = j.at("rtg_scale").get<double>();
  c.target_rtg_default = j.at("target_rtg_default").get<double>();
  const auto hi = j.at("action_high").get<std::vector<double>>();
  if (hi.size() != 3) throw ValidationError("action_high must have 3 entries");
  std::copy(hi.begin(), hi.end(), c.action_high.begin());
  c.init_seed = j.at("init_seed").get<std::uint64_t>();
  c.validate();
  return c;
}

// A K-step context window. Steps are left-padded: the first (context-valid)
// slots carry zeros and are masked out of attention and losses. Numeric
// content is already normalized (RTGs/rewards by rtg_scale, actions to
// [0,1], states as encoded observations).
struct Segment {
  std::size_t context = 0;
  std::size_t valid = 0;
  std::vector<double> rtg;             // context
  std::vector<double> states;          // context * state_dim
  std::vector<double> actions;         // context * 3
  std::vector<double> rewards;         // context
  std::vector<std::size_t> timesteps;  // context, absolute 1-based; 0 on padding
  bool last_action_valid = true;       // false while acting (the action is being predicted)

  std::size_t first_valid() const { return context - valid; }
};

// Return-conditioned policy: three linear token encoders sharing a learned
// time embedding, a causal transformer backbone (optionally LoRA-adapted),
// and a linear action decoder squashed to the action box.
class DtModel {
 public:
  explicit DtModel(DtConfig cfg) : cfg_(cfg), store_(cfg.init_seed) {
    cfg_.validate();
    rtg_encoder_ = nn::Linear::create(store_, "encoder.rtg", 1, cfg_.hidden_dim);
    state_encoder_ = nn::Linear::create(store_, "encoder.state", cfg_.state_dim, cfg_.hidden_dim);
    action_encoder_ = nn::Linear::create(store_, "encoder.action", cfg_.action_dim, cfg_.hidden_dim);
    time_embedding_ =
        store_.add("encoder.time_embedding", cfg_.max_timestep + 1, cfg_.hidden_dim, nn::Init::normal);
    backbone_ = nn::CausalTransformer::create(store_, "backbone", cfg_.hidden_dim, cfg_.n_layers,
                                              cfg_.n_heads, cfg_.ff_mult, cfg_.lora_rank,
                                              cfg_.lora_alpha);
    decoder_ = nn::Linear::create(store_, "decoder.action", cfg_.hidden_dim, cfg_.action_dim);
  }

  const DtConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }

  static bool is_backbone_param(const std::string& name) {
    return name.rfind("backbone.", 0) == 0 && name.find(".lora_") == std::string::npos;
  }

  // Trainable set under the fine-tuning freeze policy: encoders, time
  // embedding, LoRA adapters and the decoder; the backbone stays frozen.
  std::vector<Var> trainable_params(bool freeze_backbone) const {
    std::vector<Var> out;
    for (const Var& p : store_.all()) {
      if (freeze_backbone && is_backbone_param(p->name)) continue;
      out.push_back(p);
    }
    return out;
  }

  std::size_t trainable_value_count(bool freeze_backbone) const {
    std::size_t n = 0;
    for (const Var& p : trainable_params(freeze_backbone)) n += p->value.size();
    return n;
  }

  // Attention mask for a segment: key tokens must be real (unpadded, and
  // the in-flight action token is hidden), queries attend causally; padded
  // queries keep a self-link so no softmax row is empty.
  Tensor build_mask(const Segment& seg) const {
    const std::size_t k = seg.context;
    const std::size_t n_tokens = 3 * k;
    std::vector<std::uint8_t> token_valid(n_tokens, 0);
    for (std::size_t p = seg.first_valid(); p < k; ++p) {
      token_valid[3 * p] = 1;
      token_valid[3 * p + 1] = 1;
      token_valid[3 * p + 2] = (p + 1 == k && !seg.last_action_valid) ? 0 : 1;
    }
    Tensor mask(n_tokens, n_tokens);
    for (std::size_t i = 0; i < n_tokens; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        if (token_valid[j]) mask(i, j) = 1.0;
      }
      if (!token_valid[i]) mask(i, i) = 1.0;
    }
    return mask;
  }

  // Graph forward: predicted actions for every step of the segment
  // (context x 3, squashed to (0,1)). Padded rows are garbage and must be
  // excluded by the caller via the segment's validity mask.
  Var forward(const Segment& seg) const {
    if (seg.context == 0 || seg.context > cfg_.context_len) {
      throw std::invalid_argument("segment length outside [1, context_len]");
    }
    if (seg.valid == 0 || seg.valid > seg.context) throw std::invalid_argument("segment has no valid steps");
    const std::size_t k = seg.context;
    for (std::size_t t : seg.timesteps) {
      if (t > cfg_.max_timestep) throw std::invalid_argument("timestep beyond embedding table");
    }

    const Var rtg_in = ad::constant(Tensor::from_rows(k, 1, seg.rtg));
    const Var state_in = ad::constant(Tensor::from_rows(k, cfg_.state_dim, seg.states));
    const Var action_in = ad::constant(Tensor::from_rows(k, cfg_.action_dim, seg.actions));
    const Var time_tok = ad::gather_rows(time_embedding_, seg.timesteps);

    const Var rtg_tok = ad::add(rtg_encoder_(rtg_in), time_tok);
    const Var state_tok = ad::add(state_encoder_(state_in), time_tok);
    const Var action_tok = ad::add(action_encoder_(action_in), time_tok);

    // interleave (rtg, state, action) per step
    std::vector<std::size_t> perm(3 * k);
    for (std::size_t p = 0; p < k; ++p) {
      perm[3 * p] = p;
      perm[3 * p + 1] = k + p;
      perm[3 * p + 2] = 2 * k + p;
    }
    const Var tokens = ad::gather_rows(ad::concat_rows({rtg_tok, state_tok, action_tok}), perm);

    const Var hidden = backbone_(tokens, build_mask(seg));

    std::vector<std::size_t> state_positions(k);
    for (std::size_t p = 0; p < k; ++p) state_positions[p] = 3 * p + 1;
    return ad::sigmoid(decoder_(ad::gather_rows(hidden, state_positions)));
  }

  // Value-only forward returning all K normalized predictions.
  Tensor predict_all_norm(const Segment& seg) const { return forward(seg)->value; }

  std::array<double, 3> predict_last_norm(const Segment& seg) const {
    const Tensor out = predict_all_norm(seg);
    const std::size_t r = seg.context - 1;
    return {out(r, 0), out(r, 1), out(r, 2)};
  }

  std::array<double, 3> normalize_action(const UavAction& a) const {
    return {a.heading_rad / cfg_.action_high[0], a.speed_mps / cfg_.action_high[1],
            a.fly_time_s / cfg_.action_high[2]};
  }

  UavAction denormalize_action(const std::array<double, 3>& norm) const {
    return UavAction{norm[0] * cfg_.action_high[0], norm[1] * cfg_.action_high[1],
                     norm[2] * cfg_.action_high[2]};
  }

 private:
  DtConfig cfg_;
  nn::ParamStore store_;
  nn::Linear rtg_encoder_, state_encoder_, action_encoder_;
  Var time_embedding_;
  nn::CausalTransformer backbone_;
  nn::Linear decoder_;
};

}  // namespace uavdc::crdt
