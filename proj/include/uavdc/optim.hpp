// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavdc/autodiff.hpp"

namespace uavdc::nn {

struct AdamWConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

// Adam with decoupled weight decay: the decay shrinks parameters directly
// and never enters the moment estimates.
class AdamW {
 public:
  AdamW(std::vector<ad::Var> params, AdamWConfig cfg = {}) : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const ad::Var& p : params_) {
      m_.emplace_back(p->value.rows(), p->value.cols());
      v_.emplace_back(p->value.rows(), p->value.cols());
    }
  }

  void zero_grad() {
    for (const ad::Var& p : params_) {
      if (p->grad_alloc) p->grad.fill(0.0);
    }
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      ad::Node& p = *params_[i];
      auto& value = p.value.vec();
      auto& m = m_[i].vec();
      auto& v = v_[i].vec();
      const bool has_grad = p.grad_alloc;
      for (std::size_t k = 0; k < value.size(); ++k) {
        const double g = has_grad ? p.grad.vec()[k] : 0.0;
        if (!std::isfinite(g)) {
          throw std::runtime_error("non-finite gradient for parameter '" + p.name + "'");
        }
        m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g;
        v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g * g;
        const double m_hat = m[k] / bc1;
        const double v_hat = v[k] / bc2;
        value[k] -= cfg_.lr * (m_hat / (std::sqrt(v_hat) + cfg_.eps) + cfg_.weight_decay * value[k]);
      }
    }
  }

  const AdamWConfig& config() const { return cfg_; }
  std::size_t step_count() const { return t_; }

 private:
  std::vector<ad::Var> params_;
  AdamWConfig cfg_;
  std::vector<ad::Tensor> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace uavdc::nn
