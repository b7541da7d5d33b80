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


#include "appendmem/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "appendmem/episodes.hpp"
#include "appendmem/error.hpp"

namespace appendmem {
namespace {

// Bounds the activation cache of long episodes.
constexpr std::size_t kTrialChunk = 64;

BatchSpec spec_for(const ModelConfig& config, Task task, std::size_t n) {
  BatchSpec spec;
  spec.task = task;
  spec.n = n;
  spec.key_dim = config.key_dim;
  spec.memory_dim = config.memory_dim;
  spec.num_classes = config.num_classes;
  return spec;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

BatchEvaluation evaluate_trials(const ModelParams& params,
                                const ModelConfig& config, Task task,
                                std::size_t n_inputs, std::size_t trials,
                                std::uint64_t seed) {
  require(trials >= 1, ErrorCode::kInvalidArgument, "trials must be >= 1");
  require(n_inputs >= 1, ErrorCode::kInvalidArgument,
          "input count must be >= 1");
  const BatchSpec spec = spec_for(config, task, n_inputs);
  BatchEvaluation total;
  double loss_sum = 0;
  for (std::size_t first = 0; first < trials; first += kTrialChunk) {
    const std::size_t count = std::min(kTrialChunk, trials - first);
    const Batch batch =
        gen_batch_range(spec, seed, Stream::kTest, n_inputs, first, count);
    BatchEvaluation part = evaluate_batch(params, config, batch);
    loss_sum += part.loss * static_cast<double>(count);
    total.correct.insert(total.correct.end(), part.correct.begin(),
                         part.correct.end());
    total.predictions.insert(total.predictions.end(), part.predictions.begin(),
                             part.predictions.end());
  }
  total.loss = loss_sum / static_cast<double>(trials);
  return total;
}

double test_accuracy(const ModelParams& params, const ModelConfig& config,
                     Task task, std::size_t n_inputs, std::size_t trials,
                     std::uint64_t seed) {
  return evaluate_trials(params, config, task, n_inputs, trials, seed)
      .accuracy();
}

std::vector<std::size_t> default_capacity_counts() {
  return {2, 3, 4, 5, 6, 7, 8, 16, 32, 64, 128, 256};
}

SweepResult capacity_sweep(const ModelParams& params, const ModelConfig& config,
                           Task task, std::span<const std::size_t> counts,
                           std::size_t trials, std::uint64_t seed) {
  require(!counts.empty(), ErrorCode::kInvalidArgument,
          "capacity sweep needs at least one input count");
  SweepResult result{"capacity", {}};
  for (std::size_t count : counts) {
    result.rows.push_back(
        {static_cast<double>(count),
         test_accuracy(params, config, task, count, trials, seed), trials, {}});
  }
  return result;
}

SweepResult positional_accuracy(const ModelParams& params,
                                const ModelConfig& config, Task task,
                                std::size_t n_inputs, std::size_t trials,
                                std::uint64_t seed) {
  const BatchEvaluation eval =
      evaluate_trials(params, config, task, n_inputs, trials, seed);
  SweepResult result{"positional", {}};
  for (std::size_t pos = 0; pos < n_inputs; ++pos) {
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) hits += eval.correct[t * n_inputs + pos];
    result.rows.push_back({static_cast<double>(pos + 1),
                           static_cast<double>(hits) / static_cast<double>(trials),
                           trials,
                           {}});
  }
  return result;
}

SortAccuracy sort_exact_match(const ModelParams& params,
                              const ModelConfig& config, std::size_t n,
                              std::size_t trials, std::uint64_t seed) {
  const BatchEvaluation eval =
      evaluate_trials(params, config, Task::kSort, n, trials, seed);
  std::size_t exact = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto first = eval.correct.begin() + static_cast<std::ptrdiff_t>(t * n);
    exact += std::all_of(first, first + static_cast<std::ptrdiff_t>(n),
                         [](std::uint8_t c) { return c != 0; });
  }
  return {static_cast<double>(exact) / static_cast<double>(trials),
          eval.accuracy()};
}

SortOutput sort_numbers(const ModelParams& params, const ModelConfig& config,
                        std::span<const double> numbers, Rng& rng) {
  const std::size_t n = numbers.size();
  require(n >= 1, ErrorCode::kInvalidArgument, "nothing to sort");
  require(config.key_dim == 1 && config.query_dim == 1,
          ErrorCode::kTaskMismatch, "model was not trained for sorting");
  require(n <= config.num_classes, ErrorCode::kInvalidArgument,
          "cannot tag more than " + std::to_string(config.num_classes) +
              " numbers distinctly");

  std::vector<int> pool(config.num_classes);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(pool[i], pool[i + rng.uniform_index(config.num_classes - i)]);
  }
  SortOutput out;
  out.tags.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));

  MemoryVector m = sample_m0(config.memory_dim, rng);
  for (std::size_t i = 0; i < n; ++i) {
    m = memorize_step(params, config, m,
                      Tensor::vector({static_cast<float>(numbers[i])}),
                      Tensor::vector({static_cast<float>(out.tags[i])}));
  }
  std::vector<bool> used(n, false);
  out.complete = true;
  // Each rank decodes to the best-scoring tag among those handed out.
  for (std::size_t r = 0; r < n; ++r) {
    const Tensor logits = recall_logits(
        params, config, m, Tensor::vector({static_cast<float>(r)}));
    std::size_t idx = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (logits[static_cast<std::size_t>(out.tags[i])] >
          logits[static_cast<std::size_t>(out.tags[idx])]) {
        idx = i;
      }
    }
    out.predicted.push_back(out.tags[idx]);
    if (used[idx]) out.complete = false;
    used[idx] = true;
    out.sorted.push_back(numbers[idx]);
  }
  return out;
}

SweepResult overfit_control(const TrainConfig& base,
                            std::span<const std::size_t> n_values) {
  require(!n_values.empty(), ErrorCode::kInvalidArgument,
          "overfit control needs at least one n");
  SweepResult result{"overfit", {}};
  for (std::size_t n : n_values) {
    TrainConfig config = base;
    config.mode = TrainMode::kStandard;
    config.stop_metric = StopMetric::kTrainAcc;
    config.n = n;
    const TrainResult run = train(config);
    result.rows.push_back({static_cast<double>(n), run.report.final_val_acc,
                           config.batch_size, run.report.epochs_run});
  }
  return result;
}

void write_sweep_csv(const std::string& path, const SweepResult& result,
                     const std::string& checkpoint_label) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIo,
          "cannot open results file '" + path + "'");
  const bool with_epochs =
      std::any_of(result.rows.begin(), result.rows.end(),
                  [](const SweepRow& r) { return r.epochs.has_value(); });
  out << "# experiment=" << result.experiment
      << " checkpoint=" << checkpoint_label << '\n';
  out << "param,accuracy,trials" << (with_epochs ? ",epochs" : "") << '\n';
  for (const SweepRow& row : result.rows) {
    out << format_number(row.param) << ',' << format_number(row.accuracy)
        << ',' << row.trials;
    if (with_epochs) out << ',' << row.epochs.value_or(0);
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorCode::kIo,
          "write to '" + path + "' failed");
}

SweepResult read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo,
          "cannot open results file '" + path + "'");
  SweepResult result;
  std::string line;
  std::getline(in, line);
  const std::string tag = "# experiment=";
  require(line.rfind(tag, 0) == 0, ErrorCode::kInvalidArgument,
          "results file lacks the experiment comment line");
  result.experiment = line.substr(tag.size(), line.find(' ', tag.size()) - tag.size());
  std::getline(in, line);
  const bool with_epochs = line == "param,accuracy,trials,epochs";
  require(with_epochs || line == "param,accuracy,trials",
          ErrorCode::kInvalidArgument, "unexpected results header '" + line + "'");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    require(fields.size() == (with_epochs ? 4u : 3u), ErrorCode::kInvalidArgument,
            "malformed results row '" + line + "'");
    SweepRow row;
    row.param = std::stod(fields[0]);
    row.accuracy = std::stod(fields[1]);
    row.trials = std::stoull(fields[2]);
    if (with_epochs) row.epochs = std::stoull(fields[3]);
    result.rows.push_back(row);
  }
  return result;
}

double mean_accuracy(const SweepResult& result) {
  if (result.rows.empty()) return 0.0;
  double sum = 0;
  for (const auto& r : result.rows) sum += r.accuracy;
  return sum / static_cast<double>(result.rows.size());
}

double stddev_accuracy(const SweepResult& result) {
  if (result.rows.empty()) return 0.0;
  const double mean = mean_accuracy(result);
  double ss = 0;
  for (const auto& r : result.rows) ss += (r.accuracy - mean) * (r.accuracy - mean);
  return std::sqrt(ss / static_cast<double>(result.rows.size()));
}

}  // namespace appendmem
