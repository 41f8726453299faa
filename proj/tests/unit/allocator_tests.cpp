// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "uavdc/allocator.hpp"

using namespace uavdc;

namespace {

AllocationInstance make_instance(std::size_t n, std::size_t m, std::vector<double> weights,
                                 std::vector<std::uint8_t> covered = {}) {
  AllocationInstance inst;
  inst.n_devices = n;
  inst.n_rbs = m;
  inst.weights = std::move(weights);
  inst.covered = covered.empty() ? std::vector<std::uint8_t>(n, 1) : std::move(covered);
  return inst;
}

AllocationInstance random_instance(Rng& rng, std::size_t max_side = 6) {
  const std::size_t n = 1 + rng.uniform_index(max_side);
  const std::size_t m = 1 + rng.uniform_index(max_side);
  AllocationInstance inst;
  inst.n_devices = n;
  inst.n_rbs = m;
  inst.covered.assign(n, 1);
  inst.weights.resize(n * m);
  for (double& w : inst.weights) w = rng.uniform01();
  return inst;
}

}  // namespace

TEST_CASE("build_instance applies the coverage and data clamps") {
  std::vector<Device> devices{{0, 0, 0, 4e6, 4e6}, {1, 0, 0, 8e6, 8e6}};
  const std::vector<double> rates{2e6, 2e6, 2e6, 2e6};  // 2 Mb/s on both RBs

  SUBCASE("uncovered device row is all zeros") {
    const auto inst = build_instance(devices, {0, 1}, rates, 2, 5.0);
    CHECK(inst.weight(0, 0) == 0.0);
    CHECK(inst.weight(0, 1) == 0.0);
    CHECK(inst.weight(1, 0) == doctest::Approx(8e6));
  }
  SUBCASE("weight clamps to the remaining data") {
    const auto inst = build_instance(devices, {1, 1}, rates, 2, 5.0);
    CHECK(inst.weight(0, 0) == doctest::Approx(4e6));  // min(1e7, 4e6)
  }
  SUBCASE("zero hover time zeroes every weight") {
    const auto inst = build_instance(devices, {1, 1}, rates, 2, 0.0);
    for (double w : inst.weights) CHECK(w == 0.0);
  }
}

TEST_CASE("solve_optimal on hand-checked instances") {
  SUBCASE("2x2: the cross assignment wins (7 beats 3)") {
    const auto res = solve_optimal(make_instance(2, 2, {3, 1, 2, 4}));
    CHECK(res.total_weight == doctest::Approx(7.0));
    CHECK(res.rb_of_device == std::vector<int>{0, 1});
    CHECK(res.selected == std::vector<std::uint8_t>{1, 1});
  }
  SUBCASE("3 devices share one RB: best device gets it") {
    const auto res = solve_optimal(make_instance(3, 1, {5, 2, 9}));
    CHECK(res.total_weight == doctest::Approx(9.0));
    CHECK(res.rb_of_device == std::vector<int>{-1, -1, 0});
  }
  SUBCASE("all-zero weights select nobody") {
    const auto res = solve_optimal(make_instance(2, 2, {0, 0, 0, 0}));
    CHECK(res.total_weight == 0.0);
    CHECK(res.selected == std::vector<std::uint8_t>{0, 0});
  }
  SUBCASE("empty instance") {
    const auto res = solve_optimal(make_instance(0, 0, {}));
    CHECK(res.total_weight == 0.0);
    CHECK(res.rb_of_device.empty());
  }
}

TEST_CASE("brute force agrees with the optimal solver exactly") {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const AllocationInstance inst = random_instance(rng);
    const AllocationResult fast = solve_optimal(inst);
    const AllocationResult slow = solve_bruteforce(inst);
    REQUIRE(fast.total_weight == slow.total_weight);
    REQUIRE(allocation_feasible(inst, fast));
    REQUIRE(allocation_feasible(inst, slow));
  }
}

TEST_CASE("brute force basics and guard") {
  CHECK(solve_bruteforce(make_instance(1, 1, {0.37})).total_weight == doctest::Approx(0.37));
  CHECK(solve_bruteforce(make_instance(2, 0, {})).total_weight == 0.0);
  CHECK_THROWS_AS(solve_bruteforce(make_instance(9, 1, std::vector<double>(9, 1.0))),
                  std::invalid_argument);
}

TEST_CASE("baselines are feasible and never beat the optimum") {
  Rng rng(55);
  std::vector<double> data{9, 1, 5, 7, 3, 8};
  std::vector<double> gains{0.1, 0.9, 0.3, 0.5, 0.2, 0.7};
  for (int trial = 0; trial < 200; ++trial) {
    const AllocationInstance inst = random_instance(rng);
    const AllocationResult opt = solve_optimal(inst);
    std::vector<double> d(data.begin(), data.begin() + inst.n_devices);
    std::vector<double> g(gains.begin(), gains.begin() + inst.n_devices);
    for (BaselineKind kind :
         {BaselineKind::random, BaselineKind::data_aware, BaselineKind::gain_aware}) {
      BaselineAux aux;
      aux.remaining_data = &d;
      aux.gains = &g;
      aux.rng = &rng;
      const AllocationResult base = solve_baseline(inst, kind, aux);
      REQUIRE(allocation_feasible(inst, base));
      REQUIRE(base.total_weight <= opt.total_weight + 1e-12);
    }
  }
}

TEST_CASE("random baseline with a single feasible matching picks it") {
  auto inst = make_instance(1, 1, {0.5});
  Rng rng(1);
  BaselineAux aux;
  aux.rng = &rng;
  const auto res = solve_baseline(inst, BaselineKind::random, aux);
  CHECK(res.selected == std::vector<std::uint8_t>{1});
  CHECK(res.rb_of_device == std::vector<int>{0});
}

TEST_CASE("data-aware baseline selects the top devices by remaining data") {
  // 3 devices, 2 RBs, uniform weights so selection is decided by the data vector
  auto inst = make_instance(3, 2, {1, 1, 1, 1, 1, 1});
  std::vector<double> data{9, 1, 5};
  BaselineAux aux;
  aux.remaining_data = &data;
  const auto res = solve_baseline(inst, BaselineKind::data_aware, aux);
  CHECK(res.selected == std::vector<std::uint8_t>{1, 0, 1});
}

TEST_CASE("scaling all weights preserves the optimal assignment") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    AllocationInstance inst = random_instance(rng);
    const double c = rng.uniform(0.1, 50.0);
    const AllocationResult res = solve_optimal(inst);
    AllocationInstance scaled = inst;
    for (double& w : scaled.weights) w *= c;
    const AllocationResult res_scaled = solve_optimal(scaled);
    REQUIRE(res_scaled.total_weight == doctest::Approx(c * res.total_weight).epsilon(1e-12));
  }
}
