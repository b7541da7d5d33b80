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


#include "appendmem/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "appendmem/episodes.hpp"
#include "appendmem/error.hpp"

namespace appendmem {

const char* mode_name(TrainMode mode) {
  return mode == TrainMode::kStandard ? "standard" : "randomized";
}

TrainMode parse_mode(const std::string& name) {
  if (name == "standard") return TrainMode::kStandard;
  if (name == "randomized") return TrainMode::kRandomized;
  fail(ErrorCode::kInvalidArgument, "unknown mode '" + name + "'");
}

const char* stop_metric_name(StopMetric metric) {
  return metric == StopMetric::kTrainAcc ? "train_acc" : "val_acc";
}

StopMetric parse_stop_metric(const std::string& name) {
  if (name == "train_acc") return StopMetric::kTrainAcc;
  if (name == "val_acc") return StopMetric::kValAcc;
  fail(ErrorCode::kInvalidArgument, "unknown stop metric '" + name + "'");
}

const char* stop_reason_name(StopReason reason) {
  return reason == StopReason::kThreshold ? "threshold" : "max_epochs";
}

TrainConfig TrainConfig::defaults(Task task, TrainMode mode) {
  TrainConfig c;
  c.task = task;
  c.mode = mode;
  c.stop_metric =
      mode == TrainMode::kStandard ? StopMetric::kTrainAcc : StopMetric::kValAcc;
  if (task == Task::kSort) {
    c.key_dim = 1;
    c.stop_threshold = 0.95;
  }
  return c;
}

ModelConfig TrainConfig::model_config() const {
  ModelConfig m = ModelConfig::for_task(task, hidden_dim);
  m.key_dim = key_dim;
  m.query_dim = task == Task::kSort ? 1 : key_dim;
  m.leaky_slope = leaky_slope;
  return m;
}

BatchSpec TrainConfig::batch_spec() const {
  BatchSpec spec;
  spec.task = task;
  spec.n = n;
  spec.batch_size = batch_size;
  spec.key_dim = key_dim;
  spec.memory_dim = hidden_dim;
  return spec;
}

void TrainConfig::validate() const {
  auto bad = [](const std::string& what) {
    fail(ErrorCode::kInvalidArgument, what);
  };
  if (n < 1) bad("n must be at least 1");
  if (task == Task::kSort && n > kNumValueClasses) {
    bad("sorting supports at most " + std::to_string(kNumValueClasses) +
        " numbers");
  }
  if (task == Task::kSort && key_dim != 1) bad("sorting uses scalar keys");
  if (batch_size < 1) bad("batch size must be positive");
  if (hidden_dim < 1 || key_dim < 1) bad("dimensions must be positive");
  if (!(lr >= 0.0) || !std::isfinite(lr)) bad("learning rate must be >= 0");
  if (!(stop_threshold > 0.0 && stop_threshold <= 1.0)) {
    bad("stop threshold must lie in (0, 1]");
  }
  if (max_epochs < 1) bad("max_epochs must be at least 1");
  if (eval_every < 1) bad("eval_every must be at least 1");
  const StopMetric expected =
      mode == TrainMode::kStandard ? StopMetric::kTrainAcc : StopMetric::kValAcc;
  if (stop_metric != expected) {
    bad(std::string(mode_name(mode)) + " mode stops on " +
        stop_metric_name(expected) + ", not " + stop_metric_name(stop_metric));
  }
  model_config().validate();
}

EpochResult epoch_update(ModelParams& params, AdamState<float>& opt,
                         const Batch& batch, const ModelConfig& config) {
  require(batch.size() >= 1, ErrorCode::kInvalidArgument,
          "epoch_update: empty batch");
  LossAndGrads<float> lg = batch_loss_and_grads(params, config, batch);
  if (!std::isfinite(lg.loss)) {
    fail(ErrorCode::kDiverged,
         "training diverged: non-finite loss at optimizer step " +
             std::to_string(opt.step + 1));
  }
  adam_step(params, lg.grads, opt);
  return {static_cast<double>(lg.loss), lg.accuracy};
}

double evaluate(const ModelParams& params, const Batch& batch,
                const ModelConfig& config) {
  require(batch.size() >= 1, ErrorCode::kInvalidArgument,
          "evaluate: empty batch");
  return evaluate_batch(params, config, batch).accuracy();
}

TrainResult train(const TrainConfig& config, const EpochObserver& observer) {
  config.validate();
  TrainResult result;
  result.model = config.model_config();
  Rng init_rng = Rng::derive(config.seed, Stream::kInit);
  result.params = ModelParams::init(result.model, init_rng);

  AdamConfig adam;
  adam.lr = config.lr;
  auto opt = AdamState<float>::for_params(result.params, adam);

  const BatchSpec spec = config.batch_spec();
  const bool randomized = config.mode == TrainMode::kRandomized;
  Batch fixed_train;
  Batch fixed_val;
  if (!randomized) {
    fixed_train = gen_batch(spec, config.seed, Stream::kTrain, 0);
    fixed_val = gen_batch(spec, config.seed, Stream::kValidation, 0);
  }

  TrainReport& report = result.report;
  double val_acc = std::numeric_limits<double>::quiet_NaN();
  for (std::uint64_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    EpochResult step;
    if (randomized) {
      const Batch batch = gen_batch(spec, config.seed, Stream::kTrain, epoch);
      step = epoch_update(result.params, opt, batch, result.model);
    } else {
      step = epoch_update(result.params, opt, fixed_train, result.model);
    }

    const bool eval_now = epoch % config.eval_every == 0;
    if (eval_now) {
      val_acc = randomized
                    ? evaluate(result.params,
                               gen_batch(spec, config.seed, Stream::kValidation,
                                         epoch),
                               result.model)
                    : evaluate(result.params, fixed_val, result.model);
    }

    const EpochRow row{epoch, step.loss, step.train_acc, val_acc};
    report.rows.push_back(row);
    report.epochs_run = epoch;
    report.final_train_acc = step.train_acc;
    report.final_val_acc = val_acc;
    if (observer) observer(row);

    const bool reached =
        config.stop_metric == StopMetric::kTrainAcc
            ? step.train_acc >= config.stop_threshold
            : eval_now && val_acc >= config.stop_threshold;
    if (reached) {
      // Standard mode reports validation accuracy at the stopping epoch.
      if (!eval_now) {
        report.final_val_acc =
            randomized ? report.final_val_acc
                       : evaluate(result.params, fixed_val, result.model);
        report.rows.back().val_acc = report.final_val_acc;
      }
      report.stop_reason = StopReason::kThreshold;
      return result;
    }
  }
  report.stop_reason = StopReason::kMaxEpochs;
  return result;
}

TrainResult train_sort(TrainConfig config, const EpochObserver& observer) {
  config.task = Task::kSort;
  config.key_dim = 1;
  return train(config, observer);
}

MetricsCsvWriter::MetricsCsvWriter(const std::string& path)
    : out_(path, std::ios::out | std::ios::trunc) {
  require(static_cast<bool>(out_), ErrorCode::kIo,
          "cannot open metrics file '" + path + "'");
  out_ << header() << '\n';
  out_.flush();
}

void MetricsCsvWriter::append(const EpochRow& row) {
  out_ << format(row) << '\n';
  out_.flush();
  require(static_cast<bool>(out_), ErrorCode::kIo, "metrics write failed");
}

std::string MetricsCsvWriter::header() { return "epoch,loss,train_acc,val_acc"; }

std::string MetricsCsvWriter::format(const EpochRow& row) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%llu,%.9g,%.9g,%.9g",
                static_cast<unsigned long long>(row.epoch), row.loss,
                row.train_acc, row.val_acc);
  return buf;
}

std::vector<EpochRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo,
          "cannot open metrics file '" + path + "'");
  std::string line;
  std::getline(in, line);
  require(line == MetricsCsvWriter::header(), ErrorCode::kInvalidArgument,
          "unexpected metrics header '" + line + "'");
  std::vector<EpochRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EpochRow row;
    unsigned long long epoch = 0;
    char loss[64], tacc[64], vacc[64];
    require(std::sscanf(line.c_str(), "%llu,%63[^,],%63[^,],%63s", &epoch, loss,
                        tacc, vacc) == 4,
            ErrorCode::kInvalidArgument, "malformed metrics row '" + line + "'");
    row.epoch = epoch;
    row.loss = std::strtod(loss, nullptr);
    row.train_acc = std::strtod(tacc, nullptr);
    row.val_acc = std::strtod(vacc, nullptr);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace appendmem
