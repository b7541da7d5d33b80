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

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "appendmem/episode.hpp"
#include "appendmem/episodes.hpp"
#include "appendmem/model.hpp"
#include "appendmem/nn.hpp"

namespace appendmem {

// standard: one dataset drawn once and reused every epoch (overfits).
// randomized: a fresh training batch every epoch and a fresh validation
// batch at every evaluation.
enum class TrainMode { kStandard, kRandomized };
enum class StopMetric { kTrainAcc, kValAcc };
enum class StopReason { kThreshold, kMaxEpochs };

const char* mode_name(TrainMode mode);
TrainMode parse_mode(const std::string& name);
const char* stop_metric_name(StopMetric metric);
StopMetric parse_stop_metric(const std::string& name);
const char* stop_reason_name(StopReason reason);

struct TrainConfig {
  Task task = Task::kKv;
  TrainMode mode = TrainMode::kRandomized;
  std::size_t n = 2;
  std::size_t batch_size = 1024;
  std::size_t hidden_dim = 256;
  std::size_t key_dim = 16;
  double lr = 1e-3;
  StopMetric stop_metric = StopMetric::kValAcc;
  double stop_threshold = 0.8;
  std::uint64_t max_epochs = 500000;
  std::uint64_t eval_every = 1;
  std::uint64_t seed = 0;
  float leaky_slope = kDefaultLeakySlope;

  // Task- and mode-consistent defaults: sorting uses scalar keys and a 0.95
  // threshold; standard mode stops on training accuracy.
  static TrainConfig defaults(Task task, TrainMode mode);

  ModelConfig model_config() const;
  BatchSpec batch_spec() const;

  // Throws kInvalidArgument, including when the stop metric does not match
  // the mode (standard stops on train_acc, randomized on val_acc).
  void validate() const;
};

struct EpochRow {
  std::uint64_t epoch = 0;
  double loss = 0;
  double train_acc = 0;
  double val_acc = 0;  // most recent evaluation; NaN before the first one
};

struct TrainReport {
  std::uint64_t epochs_run = 0;
  double final_train_acc = 0;
  double final_val_acc = 0;
  StopReason stop_reason = StopReason::kMaxEpochs;
  std::vector<EpochRow> rows;
};

struct EpochResult {
  double loss = 0;
  double train_acc = 0;  // measured on the forward pass before the update
};

// One full-batch Adam update. Throws kDiverged on a non-finite loss.
EpochResult epoch_update(ModelParams& params, AdamState<float>& opt,
                         const Batch& batch, const ModelConfig& config);

// Fraction of correct predictions over every query of every episode.
double evaluate(const ModelParams& params, const Batch& batch,
                const ModelConfig& config);

struct TrainResult {
  ModelConfig model;
  ModelParams params;
  TrainReport report;
};

using EpochObserver = std::function<void(const EpochRow&)>;

TrainResult train(const TrainConfig& config, const EpochObserver& observer = {});

// train() with task forced to sort and sorting defaults for unset fields.
TrainResult train_sort(TrainConfig config, const EpochObserver& observer = {});

// Append-only per-epoch metrics file: header `epoch,loss,train_acc,val_acc`.
class MetricsCsvWriter {
 public:
  explicit MetricsCsvWriter(const std::string& path);
  void append(const EpochRow& row);

  static std::string header();
  static std::string format(const EpochRow& row);

 private:
  std::ofstream out_;
};

std::vector<EpochRow> read_metrics_csv(const std::string& path);

}  // namespace appendmem
