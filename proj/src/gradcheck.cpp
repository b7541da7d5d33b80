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


#include "appendmem/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "appendmem/episodes.hpp"
#include "appendmem/error.hpp"

namespace appendmem {
namespace {

constexpr int kMaxRefinements = 4;

template <typename T>
GradcheckTrial check_instance(const BasicModelParams<T>& params,
                              const ModelConfig& config, const Episode& episode,
                              const MemoryVector& m0, double eps) {
  GradcheckTrial trial;
  trial.episode_length = episode.size();
  const LossAndGrads<T> analytic =
      episode_loss_and_grads(params, config, episode, m0);

  BasicModelParams<T> probe = params;
  auto ps = probe.tensors();
  const auto gs = analytic.grads.tensors();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    BasicTensor<T>& p = *ps[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      ++trial.coordinates;
      const T saved = p[j];
      T step = static_cast<T>(eps);
      bool smooth = false;
      double fd = 0;
      for (int attempt = 0; attempt <= kMaxRefinements; ++attempt) {
        p[j] = saved + step;
        const T plus = episode_loss(probe, config, episode, m0);
        const auto plus_pattern = activation_pattern(probe, config, episode, m0);
        p[j] = saved - step;
        const T minus = episode_loss(probe, config, episode, m0);
        const auto minus_pattern = activation_pattern(probe, config, episode, m0);
        p[j] = saved;
        fd = static_cast<double>((plus - minus) / (T(2) * step));
        if (plus_pattern == minus_pattern) {
          smooth = true;
          if (attempt > 0) ++trial.refined;
          break;
        }
        step /= T(10);
      }
      if (!smooth) {
        ++trial.skipped;
        continue;
      }
      const double a = static_cast<double>((*gs[i])[j]);
      const double denom = std::max({std::abs(a), std::abs(fd), 1e-6});
      trial.max_rel_error = std::max(trial.max_rel_error, std::abs(a - fd) / denom);
    }
  }
  return trial;
}

}  // namespace

ModelConfig gradcheck_config() {
  ModelConfig c;
  c.key_dim = 4;
  c.query_dim = 4;
  c.hidden_dim = 8;
  c.memory_dim = 8;
  return c;
}

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  require(options.trials >= 1, ErrorCode::kInvalidArgument,
          "gradcheck needs at least one trial");
  require(options.eps > 0 && std::isfinite(options.eps),
          ErrorCode::kInvalidArgument, "gradcheck eps must be positive");
  const ModelConfig config = gradcheck_config();
  GradcheckReport report;
  for (int t = 0; t < options.trials; ++t) {
    Rng rng = Rng::derive(options.seed, Stream::kTest, 0x6763,
                          static_cast<std::uint64_t>(t));
    ModelParams params = ModelParams::init(config, rng);
    // Nonzero biases so every term of the backward pass is exercised.
    auto ts = params.tensors();
    for (std::size_t i = 1; i < ts.size(); i += 2) {
      for (float& b : ts[i]->data()) b = rng.uniform(-0.5f, 0.5f);
    }
    const std::size_t n = 1 + static_cast<std::size_t>(t) % 3;
    const Episode episode = gen_kv_episode(n, config.key_dim, rng);
    const MemoryVector m0 = sample_m0(config.memory_dim, rng);

    GradcheckTrial trial =
        options.double_precision
            ? check_instance(params.cast<double>(), config, episode, m0,
                             options.eps)
            : check_instance(params, config, episode, m0, options.eps);
    report.max_rel_error = std::max(report.max_rel_error, trial.max_rel_error);
    report.trials.push_back(trial);
  }
  report.passed = report.max_rel_error < options.tolerance;
  return report;
}

}  // namespace appendmem
