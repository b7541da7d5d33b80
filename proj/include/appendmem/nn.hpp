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


#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "appendmem/rng.hpp"
#include "appendmem/tensor.hpp"

namespace appendmem {

inline constexpr float kDefaultLeakySlope = 0.2f;

// y = W x + b, applied to every row of a batch.
template <typename T>
struct DenseLayer {
  BasicTensor<T> weight;  // [out_dim x in_dim]
  BasicTensor<T> bias;    // [out_dim]

  std::size_t in_dim() const { return weight.dim(1); }
  std::size_t out_dim() const { return weight.dim(0); }

  template <typename U>
  DenseLayer<U> cast() const {
    return {weight.template cast<U>(), bias.template cast<U>()};
  }
  bool operator==(const DenseLayer&) const = default;
};

template <typename T>
struct DenseGrads {
  BasicTensor<T> weight;
  BasicTensor<T> bias;
  BasicTensor<T> input;  // empty when not requested
};

template <typename T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& x, T slope);

// Subgradient at exactly zero is taken as 1.
template <typename T>
BasicTensor<T> leaky_relu_backward(const BasicTensor<T>& x,
                                   const BasicTensor<T>& upstream, T slope);

template <typename T>
BasicTensor<T> dense_forward(const DenseLayer<T>& layer,
                             const BasicTensor<T>& x);

// Weight and bias gradients are summed over the batch rows.
template <typename T>
DenseGrads<T> dense_backward(const DenseLayer<T>& layer,
                             const BasicTensor<T>& x,
                             const BasicTensor<T>& upstream,
                             bool input_grad = true);

// Row-wise, with max subtraction.
template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits);

template <typename T>
struct CrossEntropy {
  T loss;
  BasicTensor<T> dlogits;
};

template <typename T>
CrossEntropy<T> softmax_cross_entropy(const BasicTensor<T>& logits,
                                      int target_class);

template <typename T>
struct BatchCrossEntropy {
  std::vector<T> losses;   // one per row
  BasicTensor<T> dlogits;  // unscaled: softmax - onehot per row
};

template <typename T>
BatchCrossEntropy<T> softmax_cross_entropy(const BasicTensor<T>& logits,
                                           std::span<const int> targets);

// Index of the largest element; ties go to the lowest index.
template <typename T>
int argmax(std::span<const T> values);

// Weights of shape [fan_out x fan_in], i.i.d. U[-a, a], a = sqrt(6/(in+out)).
Tensor glorot_uniform_init(std::size_t fan_in, std::size_t fan_out, Rng& rng);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

template <typename T>
struct AdamState {
  AdamConfig config;
  std::vector<BasicTensor<T>> first_moment;
  std::vector<BasicTensor<T>> second_moment;
  std::uint64_t step = 0;

  template <typename Params>
  static AdamState for_params(const Params& params, AdamConfig config = {}) {
    AdamState state;
    state.config = config;
    for (const BasicTensor<T>* p : params.tensors()) {
      state.first_moment.emplace_back(p->shape());
      state.second_moment.emplace_back(p->shape());
    }
    return state;
  }
};

// One bias-corrected Adam update of a single tensor; step_index is the
// already-incremented step counter.
template <typename T>
void adam_update_tensor(BasicTensor<T>& param, const BasicTensor<T>& grad,
                        BasicTensor<T>& m, BasicTensor<T>& v,
                        const AdamConfig& config, std::uint64_t step_index);

// Params is any type exposing tensors() -> range of BasicTensor<T>*. Tensors
// are updated in that (fixed) order.
template <typename T, typename Params>
void adam_step(Params& params, const Params& grads, AdamState<T>& state) {
  auto ps = params.tensors();
  auto gs = grads.tensors();
  require(ps.size() == gs.size() && ps.size() == state.first_moment.size(),
          ErrorCode::kShapeMismatch, "adam_step: parameter count mismatch");
  ++state.step;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    adam_update_tensor(*ps[i], *gs[i], state.first_moment[i],
                       state.second_moment[i], state.config, state.step);
  }
}

// A flat list of tensors satisfying the Params protocol above.
template <typename T>
struct TensorSet {
  std::vector<BasicTensor<T>> items;

  std::vector<BasicTensor<T>*> tensors() {
    std::vector<BasicTensor<T>*> out;
    for (auto& t : items) out.push_back(&t);
    return out;
  }
  std::vector<const BasicTensor<T>*> tensors() const {
    std::vector<const BasicTensor<T>*> out;
    for (const auto& t : items) out.push_back(&t);
    return out;
  }
};

// Central differences (L(p + eps e_i) - L(p - eps e_i)) / (2 eps) for every
// coordinate of every tensor. loss(const Params&) -> T.
template <typename Params, typename LossFn, typename T>
Params finite_difference_grad(LossFn&& loss, Params params, T eps) {
  Params grads = params;
  auto ps = params.tensors();
  auto gs = grads.tensors();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    BasicTensor<T>& p = *ps[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const T saved = p[j];
      p[j] = saved + eps;
      const T plus = loss(static_cast<const Params&>(params));
      p[j] = saved - eps;
      const T minus = loss(static_cast<const Params&>(params));
      p[j] = saved;
      (*gs[i])[j] = (plus - minus) / (T(2) * eps);
    }
  }
  return grads;
}

// |a - b| / max(|a|, |b|, floor), maximized over all coordinates.
template <typename Params>
double max_relative_error(const Params& a, const Params& b,
                          double floor = 1e-6) {
  auto as = a.tensors();
  auto bs = b.tensors();
  require(as.size() == bs.size(), ErrorCode::kShapeMismatch,
          "max_relative_error: parameter count mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < as.size(); ++i) {
    require_same_shape(*as[i], *bs[i], "max_relative_error");
    for (std::size_t j = 0; j < as[i]->size(); ++j) {
      const double x = static_cast<double>((*as[i])[j]);
      const double y = static_cast<double>((*bs[i])[j]);
      const double denom = std::max({std::abs(x), std::abs(y), floor});
      worst = std::max(worst, std::abs(x - y) / denom);
    }
  }
  return worst;
}

}  // namespace appendmem
