// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "uavdc/autodiff.hpp"
#include "uavdc/common.hpp"

using namespace uavdc;
using ad::Tensor;
using ad::Var;

TEST_CASE("d/dx x^2 at x=3 is 6") {
  const Var x = ad::parameter(Tensor::scalar(3.0), "x");
  const Var y = ad::hadamard(x, x);
  ad::backward(y);
  CHECK(x->grad(0, 0) == doctest::Approx(6.0));
}

TEST_CASE("gradients accumulate across backward calls until zeroed") {
  const Var x = ad::parameter(Tensor::scalar(2.0), "x");
  ad::backward(ad::hadamard(x, x));
  ad::backward(ad::hadamard(x, x));
  CHECK(x->grad(0, 0) == doctest::Approx(8.0));
  x->grad.fill(0.0);
  ad::backward(ad::hadamard(x, x));
  CHECK(x->grad(0, 0) == doctest::Approx(4.0));
}

TEST_CASE("matmul gradients") {
  const Var a = ad::parameter(Tensor::from_rows(2, 2, {1, 2, 3, 4}), "a");
  const Var b = ad::parameter(Tensor::from_rows(2, 2, {5, 6, 7, 8}), "b");
  ad::backward(ad::sum_all(ad::matmul(a, b)));
  // d(sum(AB))/dA = ones * B^T
  CHECK(a->grad(0, 0) == doctest::Approx(11.0));
  CHECK(a->grad(0, 1) == doctest::Approx(15.0));
  CHECK(a->grad(1, 0) == doctest::Approx(11.0));
  CHECK(b->grad(0, 0) == doctest::Approx(4.0));
  CHECK(b->grad(1, 1) == doctest::Approx(6.0));
}

TEST_CASE("shape mismatches are rejected at graph build time") {
  const Var a = ad::constant(Tensor(2, 3));
  const Var b = ad::constant(Tensor(2, 3));
  CHECK_THROWS_AS(ad::matmul(a, b), std::invalid_argument);
  CHECK_THROWS_AS(ad::add(a, ad::constant(Tensor(3, 2))), std::invalid_argument);
  CHECK_THROWS_AS(ad::backward(ad::add(a, b)), std::invalid_argument);  // non-scalar root
}

TEST_CASE("layernorm output has zero mean and unit variance per row") {
  Rng rng(8);
  Tensor x(5, 16);
  for (double& v : x.vec()) v = rng.uniform(-4.0, 4.0);
  const Var gain = ad::parameter(Tensor(1, 16, 1.0), "g");
  const Var bias = ad::parameter(Tensor(1, 16, 0.0), "b");
  const Var y = ad::layernorm(ad::constant(x), gain, bias);
  for (std::size_t r = 0; r < 5; ++r) {
    double mean = 0.0, var = 0.0;
    for (std::size_t c = 0; c < 16; ++c) mean += y->value(r, c);
    mean /= 16.0;
    for (std::size_t c = 0; c < 16; ++c) {
      var += (y->value(r, c) - mean) * (y->value(r, c) - mean);
    }
    var /= 16.0;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));  // eps in the denominator
  }
}

TEST_CASE("masked softmax rows sum to one over allowed entries") {
  Rng rng(9);
  Tensor x(4, 4), mask(4, 4);
  for (double& v : x.vec()) v = rng.uniform(-3.0, 3.0);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j <= i; ++j) mask(i, j) = 1.0;
  }
  const Var y = ad::softmax_masked_rows(ad::parameter(x, "x"), mask);
  for (std::size_t i = 0; i < 4; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      if (j > i) REQUIRE(y->value(i, j) == 0.0);  // blocked entries exactly zero
      sum += y->value(i, j);
    }
    REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  // single allowed entry gets weight 1
  CHECK(y->value(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("mish fixed points and monotonicity") {
  std::vector<double> xs{0.0, 0.5, 1.0, 2.0, 4.0, 8.0};
  const Var x = ad::constant(Tensor::from_rows(1, xs.size(), xs));
  const Var y = ad::mish(x);
  CHECK(y->value(0, 0) == 0.0);  // mish(0) = 0 exactly
  for (std::size_t i = 1; i < xs.size(); ++i) REQUIRE(y->value(0, i) > y->value(0, i - 1));
  // matches x*tanh(ln(1+e^x))
  CHECK(y->value(0, 2) == doctest::Approx(1.0 * std::tanh(std::log1p(std::exp(1.0)))).epsilon(1e-12));
}

TEST_CASE("gather and concat route gradients to the right slots") {
  const Var x = ad::parameter(Tensor::from_rows(3, 2, {1, 2, 3, 4, 5, 6}), "x");
  const Var picked = ad::gather_rows(x, {2, 0, 2});
  ad::backward(ad::sum_all(picked));
  CHECK(x->grad(0, 0) == doctest::Approx(1.0));
  CHECK(x->grad(1, 0) == doctest::Approx(0.0));
  CHECK(x->grad(2, 0) == doctest::Approx(2.0));  // gathered twice

  const Var a = ad::parameter(Tensor::from_rows(2, 2, {1, 1, 1, 1}), "a");
  const Var b = ad::parameter(Tensor::from_rows(2, 1, {2, 2}), "b");
  const Var cc = ad::concat_cols({a, b});
  CHECK(cc->value.cols() == 3);
  ad::backward(ad::sum_all(ad::slice_cols(cc, 2, 1)));
  CHECK(b->grad(0, 0) == doctest::Approx(1.0));
  CHECK(a->grad(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("finite differences validate a two-layer network end to end") {
  // oracle: central differences over every parameter of a small MLP
  Rng rng(33);
  auto make_param = [&](std::size_t r, std::size_t c, const char* name) {
    Tensor t(r, c);
    for (double& v : t.vec()) v = rng.normal(0.0, 0.5);
    return ad::parameter(std::move(t), name);
  };
  const Var w1 = make_param(4, 6, "w1");
  const Var b1 = make_param(1, 6, "b1");
  const Var w2 = make_param(6, 2, "w2");
  const Var b2 = make_param(1, 2, "b2");
  Tensor xv(3, 4);
  for (double& v : xv.vec()) v = rng.normal(0.0, 1.0);
  const Var x = ad::constant(xv);

  auto loss_fn = [&]() {
    const Var h = ad::tanh_op(ad::add_rowvec(ad::matmul(x, w1), b1));
    const Var out = ad::add_rowvec(ad::matmul(h, w2), b2);
    return ad::sum_all(ad::hadamard(out, out));
  };

  const Var loss = loss_fn();
  ad::backward(loss);

  const double h = 1e-5;
  double max_err = 0.0;
  for (const Var& p : {w1, b1, w2, b2}) {
    for (std::size_t k = 0; k < p->value.size(); ++k) {
      const double orig = p->value.vec()[k];
      p->value.vec()[k] = orig + h;
      const double up = loss_fn()->value(0, 0);
      p->value.vec()[k] = orig - h;
      const double down = loss_fn()->value(0, 0);
      p->value.vec()[k] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double exact = p->grad.vec()[k];
      max_err = std::max(max_err, std::abs(numeric - exact) /
                                      std::max({1.0, std::abs(numeric), std::abs(exact)}));
    }
  }
  CHECK(max_err < 1e-4);
}
