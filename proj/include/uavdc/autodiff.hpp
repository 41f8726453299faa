// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace uavdc::ad {

// Dense row-major float64 matrix. Scalars are 1x1, row vectors 1xN.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.data_[0] = v;
    return t;
  }

  static Tensor from_rows(std::size_t rows, std::size_t cols, std::vector<double> values) {
    if (values.size() != rows * cols) throw std::invalid_argument("tensor size mismatch");
    Tensor t;
    t.rows_ = rows;
    t.cols_ = cols;
    t.data_ = std::move(values);
    return t;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace blas {

// C += A * B
inline void mm_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* crow = c.data() + i * m;
    const double* arow = a.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// C += A * B^T
inline void mm_nt_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.data() + i * k;
    double* crow = c.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const double* brow = b.data() + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

// C += A^T * B
inline void mm_tn_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t n = a.cols(), k = a.rows(), m = b.cols();
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a.data() + p * n;
    const double* brow = b.data() + p * m;
    for (std::size_t i = 0; i < n; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace blas

struct Node;
using Var = std::shared_ptr<Node>;

// A value in the computation DAG. Interior nodes carry a backward closure
// that scatters the node's gradient into its inputs.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  bool grad_alloc = false;
  std::string name;
  std::vector<Var> inputs;
  std::function<void(Node&)> backprop;

  Tensor& ensure_grad() {
    if (!grad_alloc) {
      grad = Tensor(value.rows(), value.cols());
      grad_alloc = true;
    }
    return grad;
  }
};

inline Var constant(Tensor v, std::string name = {}) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  n->name = std::move(name);
  return n;
}

inline Var parameter(Tensor v, std::string name) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  n->name = std::move(name);
  n->requires_grad = true;
  return n;
}

namespace detail {

inline Var make_op(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> backprop) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const Var& in : inputs) n->requires_grad = n->requires_grad || in->requires_grad;
  if (n->requires_grad) {
    n->inputs = std::move(inputs);
    n->backprop = std::move(backprop);
  }
  return n;
}

inline void check(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace detail

inline Var matmul(const Var& a, const Var& b) {
  detail::check(a->value.cols() == b->value.rows(), "matmul: inner dimensions differ");
  Tensor out(a->value.rows(), b->value.cols());
  blas::mm_acc(a->value, b->value, out);
  return detail::make_op(std::move(out), {a, b}, [](Node& n) {
    const Var& a = n.inputs[0];
    const Var& b = n.inputs[1];
    if (a->requires_grad) blas::mm_nt_acc(n.grad, b->value, a->ensure_grad());
    if (b->requires_grad) blas::mm_tn_acc(a->value, n.grad, b->ensure_grad());
  });
}

// a * b^T
inline Var matmul_nt(const Var& a, const Var& b) {
  detail::check(a->value.cols() == b->value.cols(), "matmul_nt: inner dimensions differ");
  Tensor out(a->value.rows(), b->value.rows());
  blas::mm_nt_acc(a->value, b->value, out);
  return detail::make_op(std::move(out), {a, b}, [](Node& n) {
    const Var& a = n.inputs[0];
    const Var& b = n.inputs[1];
    if (a->requires_grad) blas::mm_acc(n.grad, b->value, a->ensure_grad());
    if (b->requires_grad) blas::mm_tn_acc(n.grad, a->value, b->ensure_grad());
  });
}

inline Var add(const Var& a, const Var& b) {
  detail::check(a->value.same_shape(b->value), "add: shape mismatch");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out.vec()[i] += b->value.vec()[i];
  return detail::make_op(std::move(out), {a, b}, [](Node& n) {
    for (int k = 0; k < 2; ++k) {
      const Var& in = n.inputs[static_cast<std::size_t>(k)];
      if (!in->requires_grad) continue;
      Tensor& g = in->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g.vec()[i] += n.grad.vec()[i];
    }
  });
}

inline Var sub(const Var& a, const Var& b) {
  detail::check(a->value.same_shape(b->value), "sub: shape mismatch");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out.vec()[i] -= b->value.vec()[i];
  return detail::make_op(std::move(out), {a, b}, [](Node& n) {
    if (n.inputs[0]->requires_grad) {
      Tensor& g = n.inputs[0]->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g.vec()[i] += n.grad.vec()[i];
    }
    if (n.inputs[1]->requires_grad) {
      Tensor& g = n.inputs[1]->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g.vec()[i] -= n.grad.vec()[i];
    }
  });
}

// Adds a 1xC row vector to every row.
inline Var add_rowvec(const Var& a, const Var& row) {
  detail::check(row->value.rows() == 1 && row->value.cols() == a->value.cols(),
                "add_rowvec: need a 1xC row");
  Tensor out = a->value;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += row->value(0, c);
  }
  return detail::make_op(std::move(out), {a, row}, [](Node& n) {
    if (n.inputs[0]->requires_grad) {
      Tensor& g = n.inputs[0]->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g.vec()[i] += n.grad.vec()[i];
    }
    if (n.inputs[1]->requires_grad) {
      Tensor& g = n.inputs[1]->ensure_grad();
      for (std::size_t r = 0; r < n.grad.rows(); ++r) {
        for (std::size_t c = 0; c < n.grad.cols(); ++c) g(0, c) += n.grad(r, c);
      }
    }
  });
}

inline Var hadamard(const Var& a, const Var& b) {
  detail::check(a->value.same_shape(b->value), "hadamard: shape mismatch");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out.vec()[i] *= b->value.vec()[i];
  return detail::make_op(std::move(out), {a, b}, [](Node& n) {
    const Var& a = n.inputs[0];
    const Var& b = n.inputs[1];
    if (a->requires_grad) {
      Tensor& g = a->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g.vec()[i] += n.grad.vec()[i] * b->value.vec()[i];
    }
    if (b->requires_grad) {
      Tensor& g = b->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g.vec()[i] += n.grad.vec()[i] * a->value.vec()[i];
    }
  });
}

inline Var scale(const Var& a, double s) {
  Tensor out = a->value;
  for (double& v : out.vec()) v *= s;
  return detail::make_op(std::move(out), {a}, [s](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    Tensor& g = n.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g.vec()[i] += s * n.grad.vec()[i];
  });
}

namespace detail {

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

template <typename Fwd, typename Bwd>
Var unary_op(const Var& a, Fwd fwd, Bwd bwd) {
  Tensor out = a->value;
  for (double& v : out.vec()) v = fwd(v);
  return make_op(std::move(out), {a}, [bwd](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    Tensor& g = n.inputs[0]->ensure_grad();
    const Tensor& x = n.inputs[0]->value;
    for (std::size_t i = 0; i < g.size(); ++i) g.vec()[i] += n.grad.vec()[i] * bwd(x.vec()[i]);
  });
}

}  // namespace detail

inline Var sigmoid(const Var& a) {
  return detail::unary_op(
      a, [](double x) { return detail::stable_sigmoid(x); },
      [](double x) {
        const double s = detail::stable_sigmoid(x);
        return s * (1.0 - s);
      });
}

inline Var tanh_op(const Var& a) {
  return detail::unary_op(
      a, [](double x) { return std::tanh(x); },
      [](double x) {
        const double t = std::tanh(x);
        return 1.0 - t * t;
      });
}

// tanh-approximation GELU, as used in GPT-style feed-forward stacks.
inline Var gelu(const Var& a) {
  return detail::unary_op(
      a,
      [](double x) {
        constexpr double c = 0.7978845608028654;  // sqrt(2/pi)
        constexpr double k = 0.044715;
        return 0.5 * x * (1.0 + std::tanh(c * (x + k * x * x * x)));
      },
      [](double x) {
        constexpr double c = 0.7978845608028654;
        constexpr double k = 0.044715;
        const double u = c * (x + k * x * x * x);
        const double t = std::tanh(u);
        const double du = c * (1.0 + 3.0 * k * x * x);
        return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
      });
}

// mish(x) = x * tanh(softplus(x))
inline Var mish(const Var& a) {
  return detail::unary_op(
      a,
      [](double x) { return x * std::tanh(detail::softplus(x)); },
      [](double x) {
        const double sp = detail::softplus(x);
        const double t = std::tanh(sp);
        return t + x * (1.0 - t * t) * detail::stable_sigmoid(x);
      });
}

// Row-wise layer normalization with a learned affine map.
inline Var layernorm(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5) {
  detail::check(gain->value.rows() == 1 && gain->value.cols() == x->value.cols(),
                "layernorm: gain must be 1xC");
  detail::check(bias->value.rows() == 1 && bias->value.cols() == x->value.cols(),
                "layernorm: bias must be 1xC");
  const std::size_t rows = x->value.rows(), cols = x->value.cols();
  Tensor out(rows, cols);
  Tensor xhat(rows, cols);
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mean += x->value(r, c);
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = x->value(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std[r] = inv;
    for (std::size_t c = 0; c < cols; ++c) {
      xhat(r, c) = (x->value(r, c) - mean) * inv;
      out(r, c) = xhat(r, c) * gain->value(0, c) + bias->value(0, c);
    }
  }
  return detail::make_op(
      std::move(out), {x, gain, bias},
      [xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& n) {
        const Var& x = n.inputs[0];
        const Var& gain = n.inputs[1];
        const Var& bias = n.inputs[2];
        const std::size_t rows = n.grad.rows(), cols = n.grad.cols();
        if (gain->requires_grad) {
          Tensor& g = gain->ensure_grad();
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) g(0, c) += n.grad(r, c) * xhat(r, c);
          }
        }
        if (bias->requires_grad) {
          Tensor& g = bias->ensure_grad();
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) g(0, c) += n.grad(r, c);
          }
        }
        if (x->requires_grad) {
          Tensor& g = x->ensure_grad();
          for (std::size_t r = 0; r < rows; ++r) {
            double mean_gh = 0.0, mean_ghx = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
              const double gh = n.grad(r, c) * gain->value(0, c);
              mean_gh += gh;
              mean_ghx += gh * xhat(r, c);
            }
            mean_gh /= static_cast<double>(cols);
            mean_ghx /= static_cast<double>(cols);
            for (std::size_t c = 0; c < cols; ++c) {
              const double gh = n.grad(r, c) * gain->value(0, c);
              g(r, c) += inv_std[r] * (gh - mean_gh - xhat(r, c) * mean_ghx);
            }
          }
        }
      });
}

// Row softmax over the entries the mask allows (mask is 0/1, same shape);
// blocked entries are exactly zero in the output and receive no gradient.
inline Var softmax_masked_rows(const Var& x, const Tensor& mask) {
  detail::check(x->value.same_shape(mask), "softmax: mask shape mismatch");
  const std::size_t rows = x->value.rows(), cols = x->value.cols();
  Tensor out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double mx = -HUGE_VAL;
    for (std::size_t c = 0; c < cols; ++c) {
      if (mask(r, c) != 0.0 && x->value(r, c) > mx) mx = x->value(r, c);
    }
    if (mx == -HUGE_VAL) continue;  // fully masked row stays zero
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (mask(r, c) == 0.0) continue;
      out(r, c) = std::exp(x->value(r, c) - mx);
      sum += out(r, c);
    }
    for (std::size_t c = 0; c < cols; ++c) out(r, c) /= sum;
  }
  return detail::make_op(std::move(out), {x}, [mask](Node& n) {
    const Var& x = n.inputs[0];
    if (!x->requires_grad) return;
    Tensor& g = x->ensure_grad();
    const Tensor& y = n.value;
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) {
        if (mask(r, c) != 0.0) dot += n.grad(r, c) * y(r, c);
      }
      for (std::size_t c = 0; c < y.cols(); ++c) {
        if (mask(r, c) != 0.0) g(r, c) += y(r, c) * (n.grad(r, c) - dot);
      }
    }
  });
}

inline Var concat_rows(const std::vector<Var>& parts) {
  detail::check(!parts.empty(), "concat_rows: empty input");
  const std::size_t cols = parts[0]->value.cols();
  std::size_t rows = 0;
  for (const Var& p : parts) {
    detail::check(p->value.cols() == cols, "concat_rows: column mismatch");
    rows += p->value.rows();
  }
  Tensor out(rows, cols);
  std::size_t at = 0;
  for (const Var& p : parts) {
    std::copy(p->value.vec().begin(), p->value.vec().end(), out.vec().begin() + at * cols);
    at += p->value.rows();
  }
  return detail::make_op(std::move(out), parts, [](Node& n) {
    std::size_t at = 0;
    for (const Var& p : n.inputs) {
      const std::size_t rows = p->value.rows(), cols = p->value.cols();
      if (p->requires_grad) {
        Tensor& g = p->ensure_grad();
        for (std::size_t i = 0; i < rows * cols; ++i) {
          g.vec()[i] += n.grad.vec()[at * cols + i];
        }
      }
      at += rows;
    }
  });
}

inline Var concat_cols(const std::vector<Var>& parts) {
  detail::check(!parts.empty(), "concat_cols: empty input");
  const std::size_t rows = parts[0]->value.rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    detail::check(p->value.rows() == rows, "concat_cols: row mismatch");
    cols += p->value.cols();
  }
  Tensor out(rows, cols);
  std::size_t at = 0;
  for (const Var& p : parts) {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < p->value.cols(); ++c) out(r, at + c) = p->value(r, c);
    }
    at += p->value.cols();
  }
  return detail::make_op(std::move(out), parts, [](Node& n) {
    std::size_t at = 0;
    for (const Var& p : n.inputs) {
      const std::size_t rows = p->value.rows(), pcols = p->value.cols();
      if (p->requires_grad) {
        Tensor& g = p->ensure_grad();
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < pcols; ++c) g(r, c) += n.grad(r, at + c);
        }
      }
      at += pcols;
    }
  });
}

inline Var slice_cols(const Var& x, std::size_t first, std::size_t count) {
  detail::check(first + count <= x->value.cols(), "slice_cols: out of range");
  Tensor out(x->value.rows(), count);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < count; ++c) out(r, c) = x->value(r, first + c);
  }
  return detail::make_op(std::move(out), {x}, [first, count](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    Tensor& g = n.inputs[0]->ensure_grad();
    for (std::size_t r = 0; r < n.grad.rows(); ++r) {
      for (std::size_t c = 0; c < count; ++c) g(r, first + c) += n.grad(r, c);
    }
  });
}

inline Var gather_rows(const Var& x, std::vector<std::size_t> idx) {
  for (std::size_t i : idx) detail::check(i < x->value.rows(), "gather_rows: index out of range");
  const std::size_t cols = x->value.cols();
  Tensor out(idx.size(), cols);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = x->value(idx[r], c);
  }
  return detail::make_op(std::move(out), {x}, [idx = std::move(idx)](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    Tensor& g = n.inputs[0]->ensure_grad();
    for (std::size_t r = 0; r < idx.size(); ++r) {
      for (std::size_t c = 0; c < n.grad.cols(); ++c) g(idx[r], c) += n.grad(r, c);
    }
  });
}

inline Var sum_all(const Var& x) {
  double s = 0.0;
  for (double v : x->value.vec()) s += v;
  return detail::make_op(Tensor::scalar(s), {x}, [](Node& n) {
    if (!n.inputs[0]->requires_grad) return;
    Tensor& g = n.inputs[0]->ensure_grad();
    const double gs = n.grad(0, 0);
    for (double& v : g.vec()) v += gs;
  });
}

// Reverse-mode sweep from a scalar root. Gradients accumulate into every
// node that requires them; parameters keep theirs until zeroed.
inline void backward(const Var& root) {
  detail::check(root->value.rows() == 1 && root->value.cols() == 1, "backward: root must be scalar");
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.get(), 0);
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next].get();
      ++next;
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->ensure_grad()(0, 0) += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backprop && node->grad_alloc) node->backprop(*node);
  }
}

}  // namespace uavdc::ad
