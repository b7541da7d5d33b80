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

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "appendmem/episode.hpp"
#include "appendmem/nn.hpp"
#include "appendmem/rng.hpp"
#include "appendmem/tensor.hpp"

namespace appendmem {

struct ModelConfig {
  std::size_t key_dim = 16;
  std::size_t value_dim = 1;
  std::size_t query_dim = 16;
  std::size_t hidden_dim = 256;
  std::size_t memory_dim = 256;
  std::size_t num_classes = 10;
  float leaky_slope = kDefaultLeakySlope;

  // Key-value task: 16-dim keys queried by key. Sorting: scalar keys
  // queried by scalar rank.
  static ModelConfig for_task(Task task, std::size_t hidden_dim = 256);

  // Throws kInvalidArgument; hidden_dim must equal memory_dim because the
  // input and memory projections are summed elementwise.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

inline constexpr std::size_t kParamTensorCount = 14;

// Memorizer: input (key|value -> hidden), memory (memory -> hidden),
// output (hidden -> memory).
// Recaller: query (query -> hidden), memory (memory -> hidden),
// joint (2*hidden -> hidden), output (hidden -> classes).
template <typename T>
struct BasicModelParams {
  DenseLayer<T> memorizer_input;
  DenseLayer<T> memorizer_memory;
  DenseLayer<T> memorizer_output;
  DenseLayer<T> recaller_query;
  DenseLayer<T> recaller_memory;
  DenseLayer<T> recaller_joint;
  DenseLayer<T> recaller_output;

  // Glorot-uniform weights, zero biases.
  static BasicModelParams init(const ModelConfig& config, Rng& rng);
  static BasicModelParams zeros(const ModelConfig& config);

  // Fixed order: weight then bias for each layer above, in declaration order.
  std::array<BasicTensor<T>*, kParamTensorCount> tensors();
  std::array<const BasicTensor<T>*, kParamTensorCount> tensors() const;
  static const std::array<std::string_view, kParamTensorCount>& names();
  static std::array<std::vector<std::size_t>, kParamTensorCount> shapes(
      const ModelConfig& config);

  // Throws kShapeMismatch when any tensor disagrees with config.
  void check_shapes(const ModelConfig& config) const;

  template <typename U>
  BasicModelParams<U> cast() const {
    return {memorizer_input.template cast<U>(),
            memorizer_memory.template cast<U>(),
            memorizer_output.template cast<U>(),
            recaller_query.template cast<U>(),
            recaller_memory.template cast<U>(),
            recaller_joint.template cast<U>(),
            recaller_output.template cast<U>()};
  }

  bool operator==(const BasicModelParams&) const = default;
};

using ModelParams = BasicModelParams<float>;
using ModelParamsD = BasicModelParams<double>;

// Rows processed by the memorizer cell and the recaller head on the calling
// thread since the last reset.
struct OpCounters {
  std::uint64_t memorize_steps = 0;
  std::uint64_t recall_passes = 0;
};
OpCounters& op_counters();
void reset_op_counters();

// m = s(W3 (s(W1 [key|value] + b1) + s(W2 m_prev + b2)) + b3)
MemoryVector memorize_step(const ModelParams& params, const ModelConfig& config,
                           const MemoryVector& m_prev, const Tensor& key,
                           const Tensor& value);

// Folds memorize_step over the episode's pairs in order.
MemoryVector memorize_all(const ModelParams& params, const ModelConfig& config,
                          const Episode& episode, const MemoryVector& m0);

// Pre-softmax class scores for one query against memory m.
Tensor recall_logits(const ModelParams& params, const ModelConfig& config,
                     const MemoryVector& m, const Tensor& query);

int predict(const ModelParams& params, const ModelConfig& config,
            const MemoryVector& m, const Tensor& query);

template <typename T>
struct LossAndGrads {
  T loss = 0;  // mean cross-entropy over every query of every episode
  BasicModelParams<T> grads;
  double accuracy = 0;
  std::vector<std::uint8_t> correct;  // episode-major, one per query
};

// Full-unroll backpropagation through every memorization step. The initial
// memory is a constant. Batch loss is the uniform mean of episode losses.
template <typename T>
LossAndGrads<T> batch_loss_and_grads(const BasicModelParams<T>& params,
                                     const ModelConfig& config,
                                     const Batch& batch);

template <typename T>
LossAndGrads<T> episode_loss_and_grads(const BasicModelParams<T>& params,
                                       const ModelConfig& config,
                                       const Episode& episode,
                                       const MemoryVector& m0);

struct BatchEvaluation {
  double loss = 0;
  std::vector<std::uint8_t> correct;  // episode-major, one per query
  std::vector<int> predictions;

  double accuracy() const;
};

// Forward pass only.
template <typename T>
BatchEvaluation evaluate_batch(const BasicModelParams<T>& params,
                               const ModelConfig& config, const Batch& batch);

template <typename T>
T episode_loss(const BasicModelParams<T>& params, const ModelConfig& config,
               const Episode& episode, const MemoryVector& m0);

// Sign of every pre-activation that passes through the leaky ReLU; two
// parameter settings with equal patterns lie in the same linear region.
template <typename T>
std::vector<bool> activation_pattern(const BasicModelParams<T>& params,
                                     const ModelConfig& config,
                                     const Episode& episode,
                                     const MemoryVector& m0);

}  // namespace appendmem
