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


#include "appendmem/nn.hpp"

#include <Eigen/Core>
#include <cmath>
#include <limits>

namespace appendmem {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ConstMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using MutMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstVec = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>;
template <typename T>
using MutVec = Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>;

template <typename T>
void check_layer(const DenseLayer<T>& layer) {
  require(layer.weight.rank() == 2 && layer.bias.rank() == 1 &&
              layer.bias.dim(0) == layer.weight.dim(0),
          ErrorCode::kShapeMismatch, "dense layer: inconsistent weight/bias");
}

}  // namespace

template <typename T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& x, T slope) {
  BasicTensor<T> y = x;
  for (T& v : y.data()) v = v >= T(0) ? v : slope * v;
  return y;
}

template <typename T>
BasicTensor<T> leaky_relu_backward(const BasicTensor<T>& x,
                                   const BasicTensor<T>& upstream, T slope) {
  require_same_shape(x, upstream, "leaky_relu_backward");
  BasicTensor<T> dx = upstream;
  auto xs = x.data();
  auto ds = dx.data();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (xs[i] < T(0)) ds[i] *= slope;
  }
  return dx;
}

template <typename T>
BasicTensor<T> dense_forward(const DenseLayer<T>& layer,
                             const BasicTensor<T>& x) {
  check_layer(layer);
  require(x.rank() >= 1 && x.rank() <= 2 && x.cols() == layer.in_dim(),
          ErrorCode::kShapeMismatch,
          "dense_forward: input " + BasicTensor<T>::shape_string(x.shape()) +
              " vs weight " +
              BasicTensor<T>::shape_string(layer.weight.shape()));
  const auto rows = static_cast<Eigen::Index>(x.rows());
  const auto in = static_cast<Eigen::Index>(layer.in_dim());
  const auto out = static_cast<Eigen::Index>(layer.out_dim());
  BasicTensor<T> y(x.rank() == 1
                       ? std::vector<std::size_t>{layer.out_dim()}
                       : std::vector<std::size_t>{x.rows(), layer.out_dim()});
  ConstMap<T> X(x.raw(), rows, in);
  ConstMap<T> W(layer.weight.raw(), out, in);
  ConstVec<T> b(layer.bias.raw(), out);
  MutMap<T> Y(y.raw(), rows, out);
  Y.noalias() = X * W.transpose();
  Y.rowwise() += b;
  return y;
}

template <typename T>
DenseGrads<T> dense_backward(const DenseLayer<T>& layer,
                             const BasicTensor<T>& x,
                             const BasicTensor<T>& upstream, bool input_grad) {
  check_layer(layer);
  require(x.cols() == layer.in_dim() && upstream.cols() == layer.out_dim() &&
              x.rows() == upstream.rows(),
          ErrorCode::kShapeMismatch, "dense_backward: shape mismatch");
  const auto rows = static_cast<Eigen::Index>(x.rows());
  const auto in = static_cast<Eigen::Index>(layer.in_dim());
  const auto out = static_cast<Eigen::Index>(layer.out_dim());
  ConstMap<T> X(x.raw(), rows, in);
  ConstMap<T> U(upstream.raw(), rows, out);
  ConstMap<T> W(layer.weight.raw(), out, in);

  DenseGrads<T> g;
  g.weight = BasicTensor<T>(layer.weight.shape());
  g.bias = BasicTensor<T>(layer.bias.shape());
  MutMap<T>(g.weight.raw(), out, in).noalias() = U.transpose() * X;
  MutVec<T>(g.bias.raw(), out) = U.colwise().sum();
  if (input_grad) {
    g.input = BasicTensor<T>(x.shape());
    MutMap<T>(g.input.raw(), rows, in).noalias() = U * W;
  }
  return g;
}

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits) {
  require(logits.rank() >= 1 && logits.rank() <= 2 && logits.cols() > 0,
          ErrorCode::kShapeMismatch, "softmax: expected vector or batch");
  BasicTensor<T> out = logits;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const T top = *std::max_element(row.begin(), row.end());
    T sum = 0;
    for (T& v : row) {
      v = std::exp(v - top);
      sum += v;
    }
    for (T& v : row) v /= sum;
  }
  return out;
}

template <typename T>
BatchCrossEntropy<T> softmax_cross_entropy(const BasicTensor<T>& logits,
                                           std::span<const int> targets) {
  require(targets.size() == logits.rows(), ErrorCode::kShapeMismatch,
          "softmax_cross_entropy: one target per row required");
  BatchCrossEntropy<T> out;
  out.dlogits = logits;
  out.losses.resize(logits.rows());
  const std::size_t classes = logits.cols();
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const int target = targets[r];
    require(target >= 0 && static_cast<std::size_t>(target) < classes,
            ErrorCode::kInvalidArgument,
            "softmax_cross_entropy: target " + std::to_string(target) +
                " out of range");
    auto row = out.dlogits.row(r);
    const T top = *std::max_element(row.begin(), row.end());
    T sum = 0;
    for (T v : row) sum += std::exp(v - top);
    const T log_sum = std::log(sum);
    // -log softmax[target] = log(sum exp(z - top)) - (z_target - top)
    out.losses[r] = log_sum - (row[target] - top);
    for (T& v : row) v = std::exp(v - top - log_sum);
    row[target] -= T(1);
  }
  return out;
}

template <typename T>
CrossEntropy<T> softmax_cross_entropy(const BasicTensor<T>& logits,
                                      int target_class) {
  require(logits.rank() == 1, ErrorCode::kShapeMismatch,
          "softmax_cross_entropy: expected a single logit vector");
  const int targets[1] = {target_class};
  auto batch = softmax_cross_entropy(logits, std::span<const int>(targets));
  return {batch.losses[0], std::move(batch.dlogits)};
}

template <typename T>
int argmax(std::span<const T> values) {
  require(!values.empty(), ErrorCode::kInvalidArgument, "argmax: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<int>(best);
}

Tensor glorot_uniform_init(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  require(fan_in >= 1 && fan_out >= 1, ErrorCode::kInvalidArgument,
          "glorot_uniform_init: fan_in and fan_out must be positive");
  const float limit =
      std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
  Tensor w({fan_out, fan_in});
  for (float& v : w.data()) v = rng.uniform(-limit, limit);
  return w;
}

template <typename T>
void adam_update_tensor(BasicTensor<T>& param, const BasicTensor<T>& grad,
                        BasicTensor<T>& m, BasicTensor<T>& v,
                        const AdamConfig& config, std::uint64_t step_index) {
  require_same_shape(param, grad, "adam_step");
  require_same_shape(param, m, "adam_step (moments)");
  const T beta1 = static_cast<T>(config.beta1);
  const T beta2 = static_cast<T>(config.beta2);
  const T lr = static_cast<T>(config.lr);
  const T eps = static_cast<T>(config.epsilon);
  const double t = static_cast<double>(step_index);
  const T correction1 = static_cast<T>(1.0 - std::pow(config.beta1, t));
  const T correction2 = static_cast<T>(1.0 - std::pow(config.beta2, t));
  auto p = param.data();
  auto g = grad.data();
  auto ms = m.data();
  auto vs = v.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    ms[i] = beta1 * ms[i] + (T(1) - beta1) * g[i];
    vs[i] = beta2 * vs[i] + (T(1) - beta2) * g[i] * g[i];
    const T m_hat = ms[i] / correction1;
    const T v_hat = vs[i] / correction2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

#define APPENDMEM_INSTANTIATE_NN(T)                                          \
  template BasicTensor<T> leaky_relu(const BasicTensor<T>&, T);              \
  template BasicTensor<T> leaky_relu_backward(const BasicTensor<T>&,         \
                                              const BasicTensor<T>&, T);     \
  template BasicTensor<T> dense_forward(const DenseLayer<T>&,                \
                                        const BasicTensor<T>&);              \
  template DenseGrads<T> dense_backward(const DenseLayer<T>&,                \
                                        const BasicTensor<T>&,               \
                                        const BasicTensor<T>&, bool);        \
  template BasicTensor<T> softmax(const BasicTensor<T>&);                    \
  template CrossEntropy<T> softmax_cross_entropy(const BasicTensor<T>&, int); \
  template BatchCrossEntropy<T> softmax_cross_entropy(                       \
      const BasicTensor<T>&, std::span<const int>);                          \
  template int argmax(std::span<const T>);                                   \
  template void adam_update_tensor(BasicTensor<T>&, const BasicTensor<T>&,   \
                                   BasicTensor<T>&, BasicTensor<T>&,         \
                                   const AdamConfig&, std::uint64_t);

APPENDMEM_INSTANTIATE_NN(float)
APPENDMEM_INSTANTIATE_NN(double)

#undef APPENDMEM_INSTANTIATE_NN

}  // namespace appendmem
