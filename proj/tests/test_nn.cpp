// Copyright 2026 The Appendable Memory Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "appendmem/nn.hpp"
#include "appendmem/rng.hpp"
#include "appendmem/tensor.hpp"

using namespace appendmem;

namespace {

TensorD random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1,
                      double hi = 1) {
  TensorD t(std::move(shape));
  for (double& v : t.data()) v = lo + (hi - lo) * rng.uniform01f();
  return t;
}

double sum_product(const TensorD& a, const TensorD& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

}  // namespace

TEST_CASE("leaky_relu on hand examples") {
  CHECK(leaky_relu(Tensor::vector({3.0f}), 0.2f) == Tensor::vector({3.0f}));
  CHECK(leaky_relu(Tensor::vector({-2.0f}), 0.2f)[0] == doctest::Approx(-0.4));
  const Tensor y = leaky_relu(Tensor::vector({0.0f, -1.0f, 1.0f}), 0.5f);
  CHECK(y[0] == 0.0f);
  CHECK(y[1] == -0.5f);
  CHECK(y[2] == 1.0f);
}

TEST_CASE("leaky_relu_backward on hand examples") {
  CHECK(leaky_relu_backward(Tensor::vector({2.0f}), Tensor::vector({1.0f}),
                            0.2f)[0] == 1.0f);
  CHECK(leaky_relu_backward(Tensor::vector({-2.0f}), Tensor::vector({3.0f}),
                            0.2f)[0] == doctest::Approx(0.6));
  // Fixed subgradient 1 at the kink.
  CHECK(leaky_relu_backward(Tensor::vector({0.0f}), Tensor::vector({5.0f}),
                            0.2f)[0] == 5.0f);
}

TEST_CASE("leaky_relu_backward matches finite differences away from 0") {
  Rng rng(11);
  const double eps = 1e-6;
  for (int trial = 0; trial < 200; ++trial) {
    double x = -3 + 6 * rng.uniform01f();
    if (std::abs(x) < 1e-3) continue;
    const double up = -2 + 4 * rng.uniform01f();
    const auto f = [](double v) { return leaky_relu(TensorD::vector({v}), 0.2)[0]; };
    const double fd = up * (f(x + eps) - f(x - eps)) / (2 * eps);
    const double an =
        leaky_relu_backward(TensorD::vector({x}), TensorD::vector({up}), 0.2)[0];
    CHECK(rel_err(an, fd) < 1e-3);
  }
}

TEST_CASE("dense_forward on hand examples") {
  DenseLayer<float> id{Tensor::matrix(2, 2, {1, 0, 0, 1}), Tensor::vector({0, 0})};
  CHECK(dense_forward(id, Tensor::vector({5, 7})) == Tensor::vector({5, 7}));

  DenseLayer<float> row{Tensor::matrix(1, 2, {1, 1}), Tensor::vector({1})};
  CHECK(dense_forward(row, Tensor::vector({2, 3}))[0] == 6.0f);

  DenseLayer<float> bias_only{Tensor({3, 4}), Tensor::vector({1.5f, -2.0f, 0.25f})};
  const Tensor y = dense_forward(bias_only, Tensor::vector({9, -8, 7, 6}));
  CHECK(y == Tensor::vector({1.5f, -2.0f, 0.25f}));
}

TEST_CASE("dense_forward on a batch equals per-row forward") {
  Rng rng(3);
  DenseLayer<double> layer{random_tensor({4, 3}, rng), random_tensor({4}, rng)};
  const TensorD x = random_tensor({5, 3}, rng);
  const TensorD y = dense_forward(layer, x);
  REQUIRE(y.shape() == std::vector<std::size_t>{5, 4});
  for (std::size_t r = 0; r < 5; ++r) {
    const auto xr = x.row(r);
    const TensorD yr =
        dense_forward(layer, TensorD({3}, std::vector<double>(xr.begin(), xr.end())));
    for (std::size_t c = 0; c < 4; ++c) CHECK(y.at(r, c) == doctest::Approx(yr[c]));
  }
}

TEST_CASE("dense_backward on hand examples") {
  DenseLayer<float> id{Tensor::matrix(2, 2, {1, 0, 0, 1}), Tensor::vector({0, 0})};
  const auto g = dense_backward(id, Tensor::vector({1, 2}), Tensor::vector({1, 0}));
  CHECK(g.input == Tensor::vector({1, 0}));
  CHECK(g.bias == Tensor::vector({1, 0}));
  CHECK(g.weight == Tensor::matrix(2, 2, {1, 2, 0, 0}));
}

TEST_CASE("dense_backward matches finite differences") {
  Rng rng(5);
  const double eps = 1e-6;
  for (int trial = 0; trial < 5; ++trial) {
    DenseLayer<double> layer{random_tensor({3, 4}, rng), random_tensor({3}, rng)};
    TensorD x = random_tensor({2, 4}, rng);
    const TensorD up = random_tensor({2, 3}, rng);
    const auto g = dense_backward(layer, x, up);
    auto loss = [&] { return sum_product(dense_forward(layer, x), up); };
    auto probe = [&](TensorD& t, const TensorD& grad) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double saved = t[i];
        t[i] = saved + eps;
        const double plus = loss();
        t[i] = saved - eps;
        const double minus = loss();
        t[i] = saved;
        CHECK(rel_err(grad[i], (plus - minus) / (2 * eps)) < 1e-3);
      }
    };
    probe(layer.weight, g.weight);
    probe(layer.bias, g.bias);
    probe(x, g.input);
  }
}

TEST_CASE("dense_backward can skip the input gradient") {
  DenseLayer<float> id{Tensor::matrix(2, 2, {1, 0, 0, 1}), Tensor::vector({0, 0})};
  const auto g =
      dense_backward(id, Tensor::vector({1, 2}), Tensor::vector({1, 0}), false);
  CHECK(g.input.empty());
}

TEST_CASE("softmax examples") {
  const Tensor uniform = softmax(Tensor({10}));
  for (float p : uniform.data()) CHECK(p == doctest::Approx(0.1));

  const Tensor big = softmax(Tensor::vector({1000.0f, 0.0f}));
  CHECK(std::isfinite(big[0]));
  CHECK(big[0] == doctest::Approx(1.0));
  CHECK(big[1] == doctest::Approx(0.0));
}

TEST_CASE("softmax is shift invariant") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor z({10});
    for (float& v : z.data()) v = rng.uniform(-5, 5);
    Tensor shifted = z;
    const float c = rng.uniform(-50, 50);
    for (float& v : shifted.data()) v += c;
    const Tensor a = softmax(z);
    const Tensor b = softmax(shifted);
    for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-6);
  }
}

TEST_CASE("softmax yields probability vectors for extreme logits") {
  Rng rng(9);
  for (int trial = 0; trial < 10000; ++trial) {
    TensorD z({10});
    const double scale = trial % 2 ? 1e4 : 10.0;
    for (double& v : z.data()) v = scale * (2 * rng.uniform01f() - 1);
    const TensorD p = softmax(z);
    double sum = 0;
    for (double v : p.data()) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
      sum += v;
    }
    REQUIRE(std::abs(sum - 1.0) < 1e-6);
  }
  // Moderate logits stay strictly inside (0, 1).
  for (int trial = 0; trial < 1000; ++trial) {
    TensorD z({10});
    for (double& v : z.data()) v = 20 * (2 * rng.uniform01f() - 1);
    const TensorD p = softmax(z);
    for (double v : p.data()) {
      REQUIRE(v > 0.0);
      REQUIRE(v < 1.0);
    }
  }
}

TEST_CASE("softmax applies per row of a matrix") {
  const Tensor p = softmax(Tensor::matrix(2, 2, {0, 0, 100, 0}));
  CHECK(p.at(0, 0) == doctest::Approx(0.5));
  CHECK(p.at(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("cross entropy examples") {
  const auto uniform = softmax_cross_entropy(TensorD({10}), 4);
  CHECK(std::abs(uniform.loss - std::log(10.0)) < 1e-6);
  CHECK(uniform.loss == doctest::Approx(2.302585).epsilon(1e-6));

  TensorD onehot({10});
  onehot[7] = 1000;
  CHECK(softmax_cross_entropy(onehot, 7).loss < 1e-6);

  for (std::size_t classes : {2u, 3u, 7u}) {
    CHECK(std::abs(softmax_cross_entropy(TensorD({classes}), 0).loss -
                   std::log(static_cast<double>(classes))) < 1e-6);
  }
}

TEST_CASE("cross entropy is nonnegative and its gradient sums to zero") {
  Rng rng(10);
  for (int trial = 0; trial < 1000; ++trial) {
    TensorD z({10});
    for (double& v : z.data()) v = 30 * (2 * rng.uniform01f() - 1);
    const int target = static_cast<int>(rng.uniform_index(10));
    const auto ce = softmax_cross_entropy(z, target);
    REQUIRE(ce.loss >= 0.0);
    double s = 0;
    for (double v : ce.dlogits.data()) s += v;
    REQUIRE(std::abs(s) < 1e-6);
  }
}

TEST_CASE("cross entropy gradient matches finite differences") {
  Rng rng(12);
  const double eps = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    TensorD z = random_tensor({10}, rng, -3, 3);
    const int target = static_cast<int>(rng.uniform_index(10));
    const auto ce = softmax_cross_entropy(z, target);
    for (std::size_t i = 0; i < 10; ++i) {
      const double saved = z[i];
      z[i] = saved + eps;
      const double plus = softmax_cross_entropy(z, target).loss;
      z[i] = saved - eps;
      const double minus = softmax_cross_entropy(z, target).loss;
      z[i] = saved;
      CHECK(rel_err(ce.dlogits[i], (plus - minus) / (2 * eps)) < 1e-3);
    }
  }
}

TEST_CASE("batched cross entropy agrees with the single form") {
  const Tensor logits = Tensor::matrix(2, 3, {1, 2, 3, -1, 0, 4});
  const std::vector<int> targets{0, 2};
  const auto batch = softmax_cross_entropy(logits, std::span<const int>(targets));
  for (std::size_t r = 0; r < 2; ++r) {
    const auto row = logits.row(r);
    const auto single = softmax_cross_entropy(
        Tensor({3}, std::vector<float>(row.begin(), row.end())), targets[r]);
    CHECK(batch.losses[r] == doctest::Approx(single.loss));
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(batch.dlogits.at(r, c) == doctest::Approx(single.dlogits[c]));
    }
  }
}

TEST_CASE("argmax picks the largest and breaks ties low") {
  const std::vector<float> v{0.1f, 0.9f, 0.3f};
  CHECK(argmax<float>(v) == 1);
  const std::vector<float> tie(10, 0.5f);
  CHECK(argmax<float>(tie) == 0);
}

TEST_CASE("glorot init bounds and determinism") {
  Rng a(42), b(42);
  const Tensor w = glorot_uniform_init(3, 3, a);
  CHECK(w.shape() == std::vector<std::size_t>{3, 3});
  for (float v : w.data()) {
    CHECK(v >= -1.0f);
    CHECK(v <= 1.0f);
  }
  CHECK(glorot_uniform_init(3, 3, b) == w);

  const Tensor wide = glorot_uniform_init(16, 256, a);
  const float limit = std::sqrt(6.0f / 272.0f);
  for (float v : wide.data()) REQUIRE(std::abs(v) <= limit);
}

TEST_CASE("glorot init has zero mean and the uniform variance") {
  Rng rng(7);
  double sum = 0, sq = 0;
  std::size_t count = 0;
  while (count < 100000) {
    const Tensor w = glorot_uniform_init(3, 3, rng);
    for (float v : w.data()) {
      sum += v;
      sq += static_cast<double>(v) * v;
      ++count;
    }
  }
  const double mean = sum / count;
  CHECK(std::abs(mean) < 0.01);
  // U[-1, 1] has variance 1/3.
  CHECK(sq / count - mean * mean == doctest::Approx(1.0 / 3.0).epsilon(0.02));
}

TEST_CASE("adam leaves parameters unchanged under zero gradient") {
  Rng rng(1);
  TensorSet<float> params{{Tensor::vector({1.0f, -2.0f}), Tensor::matrix(1, 2, {3, 4})}};
  const TensorSet<float> zero{{Tensor({2}), Tensor({1, 2})}};
  auto state = AdamState<float>::for_params(params);
  const auto before = params.items;
  for (int i = 0; i < 5; ++i) adam_step(params, zero, state);
  CHECK(params.items == before);
  for (const auto& m : state.first_moment) {
    for (float v : m.data()) CHECK(v == 0.0f);
  }
  for (const auto& v2 : state.second_moment) {
    for (float v : v2.data()) CHECK(v == 0.0f);
  }
}

TEST_CASE("adam with zero gradient is the identity at any step count") {
  TensorSet<float> params{{Tensor::vector({0.5f, -0.25f})}};
  const TensorSet<float> zero{{Tensor({2})}};
  for (std::uint64_t step : {0u, 1u, 17u, 100000u}) {
    auto state = AdamState<float>::for_params(params);
    state.step = step;
    const auto before = params.items;
    adam_step(params, zero, state);
    CHECK(params.items == before);
  }
}

TEST_CASE("adam first step moves by lr times the gradient sign") {
  for (float g : {0.5f, -3.0f, 1e-2f}) {
    TensorSet<double> params{{TensorD::vector({1.0})}};
    const TensorSet<double> grad{{TensorD::vector({g})}};
    auto state = AdamState<double>::for_params(params);
    adam_step(params, grad, state);
    const double sign = g > 0 ? 1.0 : -1.0;
    CHECK(params.items[0][0] == doctest::Approx(1.0 - 1e-3 * sign).epsilon(1e-6));
  }
}

TEST_CASE("adam matches a reference loop over 100 steps") {
  const double g = 0.37;
  TensorSet<double> params{{TensorD::vector({2.0})}};
  const TensorSet<double> grad{{TensorD::vector({g})}};
  auto state = AdamState<double>::for_params(params);
  for (int i = 0; i < 100; ++i) adam_step(params, grad, state);

  double theta = 2.0, m = 0.0, v = 0.0;
  const double lr = 0.001, b1 = 0.9, b2 = 0.999, eps = 1e-7;
  for (int t = 1; t <= 100; ++t) {
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    theta -= lr * mh / (std::sqrt(vh) + eps);
  }
  CHECK(std::abs(params.items[0][0] - theta) < 1e-6);

  // The float path tracks the same loop.
  TensorSet<float> pf{{Tensor::vector({2.0f})}};
  const TensorSet<float> gf{{Tensor::vector({static_cast<float>(g)})}};
  auto sf = AdamState<float>::for_params(pf);
  for (int i = 0; i < 100; ++i) adam_step(pf, gf, sf);
  CHECK(std::abs(pf.items[0][0] - theta) < 1e-5);
}

TEST_CASE("finite_difference_grad on simple losses") {
  TensorSet<double> params{{TensorD::vector({3.0})}};
  const auto sq = finite_difference_grad(
      [](const TensorSet<double>& p) { return p.items[0][0] * p.items[0][0]; },
      params, 1e-3);
  CHECK(std::abs(sq.items[0][0] - 6.0) < 1e-4);

  TensorSet<double> many{{TensorD::vector({1, 2, 3}), TensorD::matrix(2, 2, {1, 2, 3, 4})}};
  const auto zero = finite_difference_grad(
      [](const TensorSet<double>&) { return 4.2; }, many, 1e-3);
  for (const auto& t : zero.items) {
    for (double v : t.data()) CHECK(v == 0.0);
  }
}

TEST_CASE("max_relative_error uses the floored denominator") {
  const TensorSet<double> a{{TensorD::vector({1.0, 0.0})}};
  const TensorSet<double> b{{TensorD::vector({1.001, 1e-9})}};
  CHECK(max_relative_error(a, b) == doctest::Approx(0.001 / 1.001));
  const TensorSet<double> c{{TensorD::vector({1.0, 0.0})}};
  CHECK(max_relative_error(a, c) == 0.0);
}

TEST_CASE("operations are deterministic") {
  Rng a(99), b(99);
  const Tensor wa = glorot_uniform_init(16, 8, a);
  const Tensor wb = glorot_uniform_init(16, 8, b);
  REQUIRE(wa == wb);
  DenseLayer<float> layer{wa, Tensor({8})};
  Tensor x({4, 16});
  for (float& v : x.data()) v = a.uniform(-1, 1);
  CHECK(dense_forward(layer, x) == dense_forward(layer, x));
  CHECK(softmax(dense_forward(layer, x)) == softmax(dense_forward(layer, x)));
}
