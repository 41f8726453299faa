// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uavdc/autodiff.hpp"
#include "uavdc/common.hpp"

namespace uavdc::nn {

using ad::Tensor;
using ad::Var;

enum class Init { zeros, ones, normal };

// Ordered registry of named parameters. Each parameter draws from its own
// rng stream keyed by name, so adding or removing modules (e.g. LoRA
// adapters) never shifts another module's initialization.
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t init_seed = 0) : init_seed_(init_seed) {}

  Var add(const std::string& name, std::size_t rows, std::size_t cols, Init init,
          double stddev = 0.02) {
    Tensor t(rows, cols);
    switch (init) {
      case Init::zeros:
        break;
      case Init::ones:
        t.fill(1.0);
        break;
      case Init::normal: {
        Rng rng(derive_seed(init_seed_, fnv1a64(name)));
        for (double& v : t.vec()) v = rng.normal(0.0, stddev);
        break;
      }
    }
    Var p = ad::parameter(std::move(t), name);
    params_.push_back(p);
    return p;
  }

  const std::vector<Var>& all() const { return params_; }

  Var find(const std::string& name) const {
    for (const Var& p : params_) {
      if (p->name == name) return p;
    }
    return nullptr;
  }

  std::size_t count_values() const {
    std::size_t n = 0;
    for (const Var& p : params_) n += p->value.size();
    return n;
  }

  void zero_grad() {
    for (const Var& p : params_) {
      if (p->grad_alloc) p->grad.fill(0.0);
    }
  }

  // Value snapshot / restore, aligned with the registration order.
  std::vector<Tensor> snapshot() const {
    std::vector<Tensor> out;
    out.reserve(params_.size());
    for (const Var& p : params_) out.push_back(p->value);
    return out;
  }

  void restore(const std::vector<Tensor>& values) {
    if (values.size() != params_.size()) throw std::invalid_argument("snapshot size mismatch");
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (!values[i].same_shape(params_[i]->value)) {
        throw std::invalid_argument("snapshot shape mismatch for " + params_[i]->name);
      }
      params_[i]->value = values[i];
    }
  }

  std::uint64_t init_seed() const { return init_seed_; }

 private:
  std::uint64_t init_seed_;
  std::vector<Var> params_;
};

// target <- rho * online + (1 - rho) * target, elementwise over all params.
inline void soft_update(ParamStore& target, const ParamStore& online, double rho) {
  const auto& t = target.all();
  const auto& o = online.all();
  if (t.size() != o.size()) throw std::invalid_argument("soft_update: param count mismatch");
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto& tv = t[i]->value.vec();
    const auto& ov = o[i]->value.vec();
    for (std::size_t k = 0; k < tv.size(); ++k) tv[k] = rho * ov[k] + (1.0 - rho) * tv[k];
  }
}

struct Linear {
  Var weight;  // in x out
  Var bias;    // 1 x out

  static Linear create(ParamStore& store, const std::string& prefix, std::size_t in,
                       std::size_t out) {
    Linear l;
    l.weight = store.add(prefix + ".weight", in, out, Init::normal);
    l.bias = store.add(prefix + ".bias", 1, out, Init::zeros);
    return l;
  }

  Var operator()(const Var& x) const { return ad::add_rowvec(ad::matmul(x, weight), bias); }
};

// Low-rank adapter pair. The down-projection is Gaussian, the up-projection
// starts at zero, so a fresh adapter is an exact identity modification.
struct LoraAdapter {
  Var down;  // in x r
  Var up;    // r x out
  std::size_t rank = 0;
  double alpha = 32.0;

  static LoraAdapter create(ParamStore& store, const std::string& prefix, std::size_t in,
                            std::size_t out, std::size_t rank, double alpha) {
    if (rank == 0) throw std::invalid_argument("LoRA rank must be >= 1");
    if (rank > in || rank > out) throw std::invalid_argument("LoRA rank exceeds layer size");
    LoraAdapter a;
    a.rank = rank;
    a.alpha = alpha;
    a.down = store.add(prefix + ".lora_down", in, rank, Init::normal);
    a.up = store.add(prefix + ".lora_up", rank, out, Init::zeros);
    return a;
  }

  double scaling() const { return alpha / static_cast<double>(rank); }
};

// Linear layer with an optional LoRA path: y = xW + b + (alpha/r) (x A) B.
// The low-rank update is never materialized at full size.
struct LoraLinear {
  Linear base;
  std::optional<LoraAdapter> adapter;

  Var operator()(const Var& x) const {
    Var y = base(x);
    if (adapter) {
      y = ad::add(y, ad::scale(ad::matmul(ad::matmul(x, adapter->down), adapter->up),
                               adapter->scaling()));
    }
    return y;
  }
};

struct LayerNorm {
  Var gain;
  Var bias;

  static LayerNorm create(ParamStore& store, const std::string& prefix, std::size_t dim) {
    LayerNorm ln;
    ln.gain = store.add(prefix + ".gain", 1, dim, Init::ones);
    ln.bias = store.add(prefix + ".bias", 1, dim, Init::zeros);
    return ln;
  }

  Var operator()(const Var& x) const { return ad::layernorm(x, gain, bias); }
};

// Multi-head self-attention with an arbitrary boolean attention mask
// (causality and padding are both expressed through the mask).
struct CausalSelfAttention {
  LoraLinear query, key, value, out;
  std::size_t n_heads = 1;
  std::size_t dim = 0;

  static CausalSelfAttention create(ParamStore& store, const std::string& prefix, std::size_t dim,
                                    std::size_t n_heads, std::size_t lora_rank, double lora_alpha) {
    if (dim % n_heads != 0) throw std::invalid_argument("hidden dim must divide by head count");
    CausalSelfAttention a;
    a.n_heads = n_heads;
    a.dim = dim;
    auto make = [&](const char* name) {
      LoraLinear l;
      l.base = Linear::create(store, prefix + "." + name, dim, dim);
      if (lora_rank > 0) {
        l.adapter = LoraAdapter::create(store, prefix + "." + name, dim, dim, lora_rank, lora_alpha);
      }
      return l;
    };
    a.query = make("query");
    a.key = make("key");
    a.value = make("value");
    a.out = make("out");
    return a;
  }

  Var operator()(const Var& x, const Tensor& mask) const {
    const std::size_t head_dim = dim / n_heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
    const Var q = query(x), k = key(x), v = value(x);
    std::vector<Var> heads;
    heads.reserve(n_heads);
    for (std::size_t h = 0; h < n_heads; ++h) {
      const Var qh = ad::slice_cols(q, h * head_dim, head_dim);
      const Var kh = ad::slice_cols(k, h * head_dim, head_dim);
      const Var vh = ad::slice_cols(v, h * head_dim, head_dim);
      const Var scores = ad::scale(ad::matmul_nt(qh, kh), inv_sqrt);
      const Var probs = ad::softmax_masked_rows(scores, mask);
      heads.push_back(ad::matmul(probs, vh));
    }
    return out(ad::concat_cols(heads));
  }
};

// Pre-norm transformer block with a GELU feed-forward.
struct TransformerBlock {
  LayerNorm ln1, ln2;
  CausalSelfAttention attn;
  Linear fc_in, fc_out;

  static TransformerBlock create(ParamStore& store, const std::string& prefix, std::size_t dim,
                                 std::size_t n_heads, std::size_t ff_mult, std::size_t lora_rank,
                                 double lora_alpha) {
    TransformerBlock b;
    b.ln1 = LayerNorm::create(store, prefix + ".ln1", dim);
    b.attn = CausalSelfAttention::create(store, prefix + ".attn", dim, n_heads, lora_rank, lora_alpha);
    b.ln2 = LayerNorm::create(store, prefix + ".ln2", dim);
    b.fc_in = Linear::create(store, prefix + ".mlp.fc_in", dim, dim * ff_mult);
    b.fc_out = Linear::create(store, prefix + ".mlp.fc_out", dim * ff_mult, dim);
    return b;
  }

  Var operator()(const Var& x, const Tensor& mask) const {
    const Var attended = ad::add(x, attn(ln1(x), mask));
    return ad::add(attended, fc_out(ad::gelu(fc_in(ln2(attended)))));
  }
};

struct CausalTransformer {
  std::vector<TransformerBlock> blocks;
  LayerNorm ln_final;
  std::size_t dim = 0;

  static CausalTransformer create(ParamStore& store, const std::string& prefix, std::size_t dim,
                                  std::size_t n_layers, std::size_t n_heads, std::size_t ff_mult,
                                  std::size_t lora_rank, double lora_alpha) {
    CausalTransformer t;
    t.dim = dim;
    for (std::size_t l = 0; l < n_layers; ++l) {
      t.blocks.push_back(TransformerBlock::create(store, prefix + ".block" + std::to_string(l), dim,
                                                  n_heads, ff_mult, lora_rank, lora_alpha));
    }
    t.ln_final = LayerNorm::create(store, prefix + ".ln_final", dim);
    return t;
  }

  Var operator()(Var x, const Tensor& mask) const {
    for (const TransformerBlock& b : blocks) x = b(x, mask);
    return ln_final(x);
  }
};

// MLP with Mish activations between hidden layers (critic-style trunk).
struct MishMlp {
  std::vector<Linear> layers;

  static MishMlp create(ParamStore& store, const std::string& prefix, std::size_t in,
                        std::size_t hidden, std::size_t n_hidden, std::size_t out) {
    MishMlp m;
    std::size_t prev = in;
    for (std::size_t i = 0; i < n_hidden; ++i) {
      m.layers.push_back(Linear::create(store, prefix + ".h" + std::to_string(i), prev, hidden));
      prev = hidden;
    }
    m.layers.push_back(Linear::create(store, prefix + ".out", prev, out));
    return m;
  }

  Var operator()(Var x) const {
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) x = ad::mish(layers[i](x));
    return layers.back()(x);
  }
};

}  // namespace uavdc::nn
