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


#include "appendmem/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace appendmem {
namespace {

thread_local OpCounters g_counters;

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a, b, "add");
  BasicTensor<T> out = a;
  auto o = out.data();
  auto bs = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bs[i];
  return out;
}

template <typename T>
void accumulate(BasicTensor<T>& into, const BasicTensor<T>& x) {
  require_same_shape(into, x, "accumulate");
  auto o = into.data();
  auto xs = x.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += xs[i];
}

template <typename T>
void accumulate(DenseLayer<T>& into, const DenseGrads<T>& g) {
  accumulate(into.weight, g.weight);
  accumulate(into.bias, g.bias);
}

template <typename T>
DenseLayer<T> zero_layer(std::size_t in, std::size_t out) {
  return {BasicTensor<T>({out, in}), BasicTensor<T>({out})};
}

template <typename T>
DenseLayer<T> as_layer(DenseGrads<T>&& g) {
  return {std::move(g.weight), std::move(g.bias)};
}

// Inputs of a batch laid out for the batched passes.
template <typename T>
struct Packed {
  std::size_t batch = 0;
  std::size_t length = 0;
  std::vector<BasicTensor<T>> step_inputs;  // per step: [B x key_dim+1]
  BasicTensor<T> m0;                        // [B x memory_dim]
  BasicTensor<T> queries;                   // [B*N x query_dim]
  std::vector<int> targets;                 // B*N
};

template <typename T>
Packed<T> pack(const ModelConfig& config, const Batch& batch) {
  require(batch.size() >= 1, ErrorCode::kInvalidArgument, "empty batch");
  require(batch.m0.size() == batch.size(), ErrorCode::kShapeMismatch,
          "batch needs one initial memory per episode");
  const std::size_t b = batch.size();
  const std::size_t n = batch.episode_length();
  require(n >= 1, ErrorCode::kInvalidArgument,
          "episode must hold at least one pair");
  const std::size_t in_dim = config.key_dim + config.value_dim;

  Packed<T> p;
  p.batch = b;
  p.length = n;
  p.step_inputs.assign(n, BasicTensor<T>({b, in_dim}));
  p.m0 = BasicTensor<T>({b, config.memory_dim});
  p.queries = BasicTensor<T>({b * n, config.query_dim});
  p.targets.resize(b * n);

  for (std::size_t e = 0; e < b; ++e) {
    const Episode& ep = batch.episodes[e];
    require(ep.size() == n && ep.targets.size() == n &&
                ep.key_dim == config.key_dim &&
                ep.query_dim == config.query_dim &&
                ep.keys.size() == n * config.key_dim &&
                ep.queries.size() == n * config.query_dim,
            ErrorCode::kShapeMismatch,
            "episode " + std::to_string(e) +
                " does not match the model configuration or batch length");
    require(batch.m0[e].dim() == config.memory_dim, ErrorCode::kShapeMismatch,
            "initial memory dimension mismatch");
    for (std::size_t t = 0; t < n; ++t) {
      auto row = p.step_inputs[t].row(e);
      auto key = ep.key(t);
      std::copy(key.begin(), key.end(), row.begin());
      row[config.key_dim] = static_cast<T>(ep.values[t]);
      auto qrow = p.queries.row(e * n + t);
      auto q = ep.query(t);
      std::copy(q.begin(), q.end(), qrow.begin());
      p.targets[e * n + t] = ep.targets[t];
    }
    auto mrow = p.m0.row(e);
    auto mv = batch.m0[e].values.data();
    std::copy(mv.begin(), mv.end(), mrow.begin());
  }
  return p;
}

template <typename T>
struct Forward {
  std::vector<BasicTensor<T>> p_pre, q_pre, sum, m_pre;
  std::vector<BasicTensor<T>> memory;  // memory[0] = m0, memory[t] after t steps
  BasicTensor<T> r_pre, s_pre, joined, h_pre, h, logits;
};

template <typename T>
Forward<T> forward(const BasicModelParams<T>& params, const ModelConfig& config,
                   const Packed<T>& in) {
  const T slope = static_cast<T>(config.leaky_slope);
  const std::size_t b = in.batch;
  const std::size_t n = in.length;
  const std::size_t h = config.hidden_dim;
  Forward<T> f;
  f.memory.push_back(in.m0);
  for (std::size_t t = 0; t < n; ++t) {
    f.p_pre.push_back(dense_forward(params.memorizer_input, in.step_inputs[t]));
    f.q_pre.push_back(dense_forward(params.memorizer_memory, f.memory.back()));
    f.sum.push_back(add(leaky_relu(f.p_pre.back(), slope),
                        leaky_relu(f.q_pre.back(), slope)));
    f.m_pre.push_back(dense_forward(params.memorizer_output, f.sum.back()));
    f.memory.push_back(leaky_relu(f.m_pre.back(), slope));
  }
  g_counters.memorize_steps += b * n;

  f.r_pre = dense_forward(params.recaller_query, in.queries);
  f.s_pre = dense_forward(params.recaller_memory, f.memory.back());
  const BasicTensor<T> r = leaky_relu(f.r_pre, slope);
  const BasicTensor<T> s = leaky_relu(f.s_pre, slope);
  f.joined = BasicTensor<T>({b * n, 2 * h});
  for (std::size_t e = 0; e < b; ++e) {
    auto srow = s.row(e);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = f.joined.row(e * n + i);
      auto rrow = r.row(e * n + i);
      std::copy(rrow.begin(), rrow.end(), dst.begin());
      std::copy(srow.begin(), srow.end(), dst.begin() + h);
    }
  }
  f.h_pre = dense_forward(params.recaller_joint, f.joined);
  f.h = leaky_relu(f.h_pre, slope);
  f.logits = dense_forward(params.recaller_output, f.h);
  g_counters.recall_passes += b * n;
  return f;
}

template <typename T>
LossAndGrads<T> loss_and_grads(const BasicModelParams<T>& params,
                               const ModelConfig& config, const Batch& batch) {
  config.validate();
  params.check_shapes(config);
  const Packed<T> in = pack<T>(config, batch);
  Forward<T> f = forward(params, config, in);
  const T slope = static_cast<T>(config.leaky_slope);
  const std::size_t b = in.batch;
  const std::size_t n = in.length;
  const std::size_t h = config.hidden_dim;
  const std::size_t rows = b * n;

  auto ce = softmax_cross_entropy(f.logits, std::span<const int>(in.targets));
  LossAndGrads<T> out;
  double loss_sum = 0;
  std::size_t hits = 0;
  out.correct.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    loss_sum += static_cast<double>(ce.losses[r]);
    const bool ok = argmax<T>(f.logits.row(r)) == in.targets[r];
    out.correct[r] = ok;
    hits += ok;
  }
  out.loss = static_cast<T>(loss_sum / static_cast<double>(rows));
  out.accuracy = static_cast<double>(hits) / static_cast<double>(rows);

  BasicTensor<T>& dlogits = ce.dlogits;
  const T scale = T(1) / static_cast<T>(rows);
  for (T& v : dlogits.data()) v *= scale;

  BasicModelParams<T>& g = out.grads;
  DenseGrads<T> g7 = dense_backward(params.recaller_output, f.h, dlogits);
  const BasicTensor<T> dh_pre = leaky_relu_backward(f.h_pre, g7.input, slope);
  g.recaller_output = as_layer(std::move(g7));

  DenseGrads<T> g6 = dense_backward(params.recaller_joint, f.joined, dh_pre);
  BasicTensor<T> dr({rows, h});
  BasicTensor<T> ds({b, h});
  for (std::size_t e = 0; e < b; ++e) {
    auto ds_row = ds.row(e);
    for (std::size_t i = 0; i < n; ++i) {
      auto src = g6.input.row(e * n + i);
      auto dr_row = dr.row(e * n + i);
      std::copy(src.begin(), src.begin() + h, dr_row.begin());
      for (std::size_t k = 0; k < h; ++k) ds_row[k] += src[h + k];
    }
  }
  g6.input = {};
  g.recaller_joint = as_layer(std::move(g6));

  g.recaller_query = as_layer(dense_backward(
      params.recaller_query, in.queries,
      leaky_relu_backward(f.r_pre, dr, slope), false));

  DenseGrads<T> g5 =
      dense_backward(params.recaller_memory, f.memory.back(),
                     leaky_relu_backward(f.s_pre, ds, slope));
  BasicTensor<T> dm = std::move(g5.input);
  g5.input = {};
  g.recaller_memory = as_layer(std::move(g5));

  const std::size_t in_dim = config.key_dim + config.value_dim;
  g.memorizer_input = zero_layer<T>(in_dim, h);
  g.memorizer_memory = zero_layer<T>(config.memory_dim, h);
  g.memorizer_output = zero_layer<T>(h, config.memory_dim);
  for (std::size_t t = n; t-- > 0;) {
    const BasicTensor<T> dm_pre = leaky_relu_backward(f.m_pre[t], dm, slope);
    DenseGrads<T> g3 = dense_backward(params.memorizer_output, f.sum[t], dm_pre);
    accumulate(g.memorizer_output, g3);
    accumulate(g.memorizer_input,
               dense_backward(params.memorizer_input, in.step_inputs[t],
                              leaky_relu_backward(f.p_pre[t], g3.input, slope),
                              false));
    DenseGrads<T> g2 = dense_backward(
        params.memorizer_memory, f.memory[t],
        leaky_relu_backward(f.q_pre[t], g3.input, slope), t > 0);
    accumulate(g.memorizer_memory, g2);
    dm = std::move(g2.input);
  }
  return out;
}

Batch single_episode_batch(const Episode& episode, const MemoryVector& m0) {
  Batch batch;
  batch.episodes.push_back(episode);
  batch.m0.push_back(m0);
  return batch;
}

}  // namespace

ModelConfig ModelConfig::for_task(Task task, std::size_t hidden_dim) {
  ModelConfig c;
  c.hidden_dim = hidden_dim;
  c.memory_dim = hidden_dim;
  if (task == Task::kSort) {
    c.key_dim = 1;
    c.query_dim = 1;
  }
  return c;
}

void ModelConfig::validate() const {
  require(key_dim >= 1 && query_dim >= 1 && hidden_dim >= 1 && memory_dim >= 1,
          ErrorCode::kInvalidArgument, "model dimensions must be positive");
  require(value_dim == 1, ErrorCode::kInvalidArgument,
          "value_dim must be 1 (values enter as a scalar)");
  require(hidden_dim == memory_dim, ErrorCode::kInvalidArgument,
          "hidden_dim must equal memory_dim");
  require(num_classes >= 2, ErrorCode::kInvalidArgument,
          "num_classes must be at least 2");
  require(leaky_slope > 0.0f && leaky_slope < 1.0f, ErrorCode::kInvalidArgument,
          "leaky_slope must lie in (0, 1)");
}

template <typename T>
std::array<std::vector<std::size_t>, kParamTensorCount>
BasicModelParams<T>::shapes(const ModelConfig& c) {
  const std::size_t h = c.hidden_dim;
  return {{{h, c.key_dim + c.value_dim},
           {h},
           {h, c.memory_dim},
           {h},
           {c.memory_dim, h},
           {c.memory_dim},
           {h, c.query_dim},
           {h},
           {h, c.memory_dim},
           {h},
           {h, 2 * h},
           {h},
           {c.num_classes, h},
           {c.num_classes}}};
}

template <typename T>
BasicModelParams<T> BasicModelParams<T>::zeros(const ModelConfig& config) {
  config.validate();
  BasicModelParams p;
  const auto sh = shapes(config);
  auto ts = p.tensors();
  for (std::size_t i = 0; i < kParamTensorCount; ++i) {
    *ts[i] = BasicTensor<T>(sh[i]);
  }
  return p;
}

template <typename T>
BasicModelParams<T> BasicModelParams<T>::init(const ModelConfig& config,
                                              Rng& rng) {
  BasicModelParams p = zeros(config);
  auto ts = p.tensors();
  for (std::size_t i = 0; i < kParamTensorCount; i += 2) {
    BasicTensor<T>& w = *ts[i];
    *ts[i] = glorot_uniform_init(w.dim(1), w.dim(0), rng).template cast<T>();
  }
  return p;
}

template <typename T>
std::array<BasicTensor<T>*, kParamTensorCount> BasicModelParams<T>::tensors() {
  return {&memorizer_input.weight,  &memorizer_input.bias,
          &memorizer_memory.weight, &memorizer_memory.bias,
          &memorizer_output.weight, &memorizer_output.bias,
          &recaller_query.weight,   &recaller_query.bias,
          &recaller_memory.weight,  &recaller_memory.bias,
          &recaller_joint.weight,   &recaller_joint.bias,
          &recaller_output.weight,  &recaller_output.bias};
}

template <typename T>
std::array<const BasicTensor<T>*, kParamTensorCount>
BasicModelParams<T>::tensors() const {
  return {&memorizer_input.weight,  &memorizer_input.bias,
          &memorizer_memory.weight, &memorizer_memory.bias,
          &memorizer_output.weight, &memorizer_output.bias,
          &recaller_query.weight,   &recaller_query.bias,
          &recaller_memory.weight,  &recaller_memory.bias,
          &recaller_joint.weight,   &recaller_joint.bias,
          &recaller_output.weight,  &recaller_output.bias};
}

template <typename T>
const std::array<std::string_view, kParamTensorCount>&
BasicModelParams<T>::names() {
  static const std::array<std::string_view, kParamTensorCount> kNames = {
      "memorizer.input.weight",  "memorizer.input.bias",
      "memorizer.memory.weight", "memorizer.memory.bias",
      "memorizer.output.weight", "memorizer.output.bias",
      "recaller.query.weight",   "recaller.query.bias",
      "recaller.memory.weight",  "recaller.memory.bias",
      "recaller.joint.weight",   "recaller.joint.bias",
      "recaller.output.weight",  "recaller.output.bias"};
  return kNames;
}

template <typename T>
void BasicModelParams<T>::check_shapes(const ModelConfig& config) const {
  const auto sh = shapes(config);
  const auto ts = tensors();
  for (std::size_t i = 0; i < kParamTensorCount; ++i) {
    require(ts[i]->shape() == sh[i], ErrorCode::kShapeMismatch,
            std::string(names()[i]) + " has shape " +
                BasicTensor<T>::shape_string(ts[i]->shape()) + ", expected " +
                BasicTensor<T>::shape_string(sh[i]));
  }
}

template struct BasicModelParams<float>;
template struct BasicModelParams<double>;

OpCounters& op_counters() { return g_counters; }
void reset_op_counters() { g_counters = {}; }

MemoryVector memorize_step(const ModelParams& params, const ModelConfig& config,
                           const MemoryVector& m_prev, const Tensor& key,
                           const Tensor& value) {
  require(key.rank() == 1 && key.size() == config.key_dim,
          ErrorCode::kShapeMismatch,
          "memorize_step: key must have " + std::to_string(config.key_dim) +
              " elements");
  require(value.rank() == 1 && value.size() == config.value_dim,
          ErrorCode::kShapeMismatch, "memorize_step: value dimension mismatch");
  require(m_prev.dim() == config.memory_dim, ErrorCode::kShapeMismatch,
          "memorize_step: memory dimension mismatch");
  const float slope = config.leaky_slope;
  std::vector<float> joined(key.data().begin(), key.data().end());
  joined.insert(joined.end(), value.data().begin(), value.data().end());
  const std::size_t width = joined.size();
  const Tensor u({width}, std::move(joined));
  const Tensor p = leaky_relu(dense_forward(params.memorizer_input, u), slope);
  const Tensor q =
      leaky_relu(dense_forward(params.memorizer_memory, m_prev.values), slope);
  ++g_counters.memorize_steps;
  return {leaky_relu(dense_forward(params.memorizer_output, add(p, q)), slope)};
}

MemoryVector memorize_all(const ModelParams& params, const ModelConfig& config,
                          const Episode& episode, const MemoryVector& m0) {
  require(episode.size() >= 1, ErrorCode::kInvalidArgument,
          "memorize_all: empty episode");
  MemoryVector m = m0;
  for (std::size_t t = 0; t < episode.size(); ++t) {
    auto k = episode.key(t);
    m = memorize_step(params, config, m,
                      Tensor({k.size()}, std::vector<float>(k.begin(), k.end())),
                      Tensor::vector({static_cast<float>(episode.values[t])}));
  }
  return m;
}

Tensor recall_logits(const ModelParams& params, const ModelConfig& config,
                     const MemoryVector& m, const Tensor& query) {
  require(query.rank() == 1 && query.size() == config.query_dim,
          ErrorCode::kShapeMismatch,
          "recall: query must have " + std::to_string(config.query_dim) +
              " elements");
  require(m.dim() == config.memory_dim, ErrorCode::kShapeMismatch,
          "recall: memory dimension mismatch");
  const float slope = config.leaky_slope;
  const Tensor r = leaky_relu(dense_forward(params.recaller_query, query), slope);
  const Tensor s =
      leaky_relu(dense_forward(params.recaller_memory, m.values), slope);
  std::vector<float> joined(r.data().begin(), r.data().end());
  joined.insert(joined.end(), s.data().begin(), s.data().end());
  const Tensor h = leaky_relu(
      dense_forward(params.recaller_joint, Tensor({joined.size()}, joined)),
      slope);
  ++g_counters.recall_passes;
  return dense_forward(params.recaller_output, h);
}

int predict(const ModelParams& params, const ModelConfig& config,
            const MemoryVector& m, const Tensor& query) {
  const Tensor logits = recall_logits(params, config, m, query);
  return argmax(logits.data());
}

template <typename T>
LossAndGrads<T> batch_loss_and_grads(const BasicModelParams<T>& params,
                                     const ModelConfig& config,
                                     const Batch& batch) {
  return loss_and_grads(params, config, batch);
}

template <typename T>
LossAndGrads<T> episode_loss_and_grads(const BasicModelParams<T>& params,
                                       const ModelConfig& config,
                                       const Episode& episode,
                                       const MemoryVector& m0) {
  return loss_and_grads(params, config, single_episode_batch(episode, m0));
}

double BatchEvaluation::accuracy() const {
  if (correct.empty()) return 0.0;
  std::size_t hits = 0;
  for (auto c : correct) hits += c;
  return static_cast<double>(hits) / static_cast<double>(correct.size());
}

template <typename T>
BatchEvaluation evaluate_batch(const BasicModelParams<T>& params,
                               const ModelConfig& config, const Batch& batch) {
  config.validate();
  params.check_shapes(config);
  const Packed<T> in = pack<T>(config, batch);
  const Forward<T> f = forward(params, config, in);
  const auto ce = softmax_cross_entropy(f.logits, std::span<const int>(in.targets));
  BatchEvaluation out;
  const std::size_t rows = in.targets.size();
  out.correct.resize(rows);
  out.predictions.resize(rows);
  double loss_sum = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    out.predictions[r] = argmax<T>(f.logits.row(r));
    out.correct[r] = out.predictions[r] == in.targets[r];
    loss_sum += static_cast<double>(ce.losses[r]);
  }
  out.loss = loss_sum / static_cast<double>(rows);
  return out;
}

template <typename T>
T episode_loss(const BasicModelParams<T>& params, const ModelConfig& config,
               const Episode& episode, const MemoryVector& m0) {
  const Packed<T> in = pack<T>(config, single_episode_batch(episode, m0));
  const Forward<T> f = forward(params, config, in);
  const auto ce = softmax_cross_entropy(f.logits, std::span<const int>(in.targets));
  T sum = 0;
  for (T l : ce.losses) sum += l;
  return sum / static_cast<T>(ce.losses.size());
}

template <typename T>
std::vector<bool> activation_pattern(const BasicModelParams<T>& params,
                                     const ModelConfig& config,
                                     const Episode& episode,
                                     const MemoryVector& m0) {
  const Packed<T> in = pack<T>(config, single_episode_batch(episode, m0));
  const Forward<T> f = forward(params, config, in);
  std::vector<bool> bits;
  auto push = [&bits](const BasicTensor<T>& t) {
    for (T v : t.data()) bits.push_back(v >= T(0));
  };
  for (std::size_t t = 0; t < in.length; ++t) {
    push(f.p_pre[t]);
    push(f.q_pre[t]);
    push(f.m_pre[t]);
  }
  push(f.r_pre);
  push(f.s_pre);
  push(f.h_pre);
  return bits;
}

#define APPENDMEM_INSTANTIATE_MODEL(T)                                       \
  template LossAndGrads<T> batch_loss_and_grads(                            \
      const BasicModelParams<T>&, const ModelConfig&, const Batch&);        \
  template LossAndGrads<T> episode_loss_and_grads(                          \
      const BasicModelParams<T>&, const ModelConfig&, const Episode&,       \
      const MemoryVector&);                                                 \
  template BatchEvaluation evaluate_batch(const BasicModelParams<T>&,       \
                                          const ModelConfig&, const Batch&); \
  template T episode_loss(const BasicModelParams<T>&, const ModelConfig&,   \
                          const Episode&, const MemoryVector&);             \
  template std::vector<bool> activation_pattern(                            \
      const BasicModelParams<T>&, const ModelConfig&, const Episode&,       \
      const MemoryVector&);

APPENDMEM_INSTANTIATE_MODEL(float)
APPENDMEM_INSTANTIATE_MODEL(double)

#undef APPENDMEM_INSTANTIATE_MODEL

}  // namespace appendmem
