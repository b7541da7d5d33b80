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


#include "appendmem/appendmem.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "appendmem/episodes.hpp"
#include "appendmem/error.hpp"
#include "appendmem/experiments.hpp"
#include "appendmem/gradcheck.hpp"
#include "appendmem/memstore.hpp"
#include "appendmem/trainer.hpp"

struct am_checkpoint {
  std::shared_ptr<const appendmem::Checkpoint> value;
};

struct am_session {
  appendmem::Session value;
};

namespace {

using namespace appendmem;

thread_local std::string g_last_error;

am_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return AM_ERR_INVALID_ARGUMENT;
    case ErrorCode::kShapeMismatch: return AM_ERR_SHAPE_MISMATCH;
    case ErrorCode::kIo: return AM_ERR_IO;
    case ErrorCode::kBadMagic: return AM_ERR_BAD_MAGIC;
    case ErrorCode::kUnsupportedVersion: return AM_ERR_UNSUPPORTED_VERSION;
    case ErrorCode::kTruncated: return AM_ERR_TRUNCATED;
    case ErrorCode::kDiverged: return AM_ERR_DIVERGED;
    case ErrorCode::kTaskMismatch: return AM_ERR_TASK_MISMATCH;
  }
  return AM_ERR_INTERNAL;
}

am_status fail_with(am_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <class F>
am_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return AM_OK;
  } catch (const Error& e) {
    return fail_with(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail_with(AM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail_with(AM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail_with(AM_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* what) {
  require(p != nullptr, ErrorCode::kInvalidArgument,
          std::string(what) + " must not be null");
}

Task to_task(am_task task) {
  switch (task) {
    case AM_TASK_KV: return Task::kKv;
    case AM_TASK_SORT: return Task::kSort;
  }
  fail(ErrorCode::kInvalidArgument, "unknown task");
}

am_task from_task(Task task) {
  return task == Task::kSort ? AM_TASK_SORT : AM_TASK_KV;
}

TrainMode to_mode(am_mode mode) {
  switch (mode) {
    case AM_MODE_STANDARD: return TrainMode::kStandard;
    case AM_MODE_RANDOMIZED: return TrainMode::kRandomized;
  }
  fail(ErrorCode::kInvalidArgument, "unknown training mode");
}

TrainConfig to_train_config(const am_train_config& c) {
  TrainConfig out;
  out.task = to_task(c.task);
  out.mode = to_mode(c.mode);
  out.n = c.n;
  out.batch_size = c.batch_size;
  out.hidden_dim = c.hidden_dim;
  out.key_dim = c.key_dim;
  out.lr = c.lr;
  switch (c.stop_metric) {
    case AM_STOP_TRAIN_ACC: out.stop_metric = StopMetric::kTrainAcc; break;
    case AM_STOP_VAL_ACC: out.stop_metric = StopMetric::kValAcc; break;
    default: fail(ErrorCode::kInvalidArgument, "unknown stop metric");
  }
  out.stop_threshold = c.stop_threshold;
  out.max_epochs = c.max_epochs;
  out.eval_every = c.eval_every;
  out.seed = c.seed;
  out.leaky_slope = c.leaky_slope;
  return out;
}

am_train_config from_train_config(const TrainConfig& c) {
  am_train_config out{};
  out.task = from_task(c.task);
  out.mode = c.mode == TrainMode::kStandard ? AM_MODE_STANDARD
                                            : AM_MODE_RANDOMIZED;
  out.n = static_cast<uint32_t>(c.n);
  out.batch_size = static_cast<uint32_t>(c.batch_size);
  out.hidden_dim = static_cast<uint32_t>(c.hidden_dim);
  out.key_dim = static_cast<uint32_t>(c.key_dim);
  out.lr = c.lr;
  out.stop_metric = c.stop_metric == StopMetric::kTrainAcc ? AM_STOP_TRAIN_ACC
                                                           : AM_STOP_VAL_ACC;
  out.stop_threshold = c.stop_threshold;
  out.max_epochs = c.max_epochs;
  out.eval_every = c.eval_every;
  out.seed = c.seed;
  out.leaky_slope = c.leaky_slope;
  return out;
}

Tensor key_tensor(const Checkpoint& ckpt, const float* key, size_t len) {
  need(key, "key");
  require(len == ckpt.config.key_dim, ErrorCode::kShapeMismatch,
          "key has " + std::to_string(len) + " elements, model expects " +
              std::to_string(ckpt.config.key_dim));
  return Tensor({len}, std::vector<float>(key, key + len));
}

void require_task(const Checkpoint& ckpt, Task expected, const char* what) {
  require(ckpt.task == expected, ErrorCode::kTaskMismatch,
          std::string(what) + " needs a " + task_name(expected) +
              " model, checkpoint holds a " + task_name(ckpt.task) + " model");
}

std::vector<std::size_t> to_sizes(const uint32_t* p, size_t len) {
  std::vector<std::size_t> out;
  for (size_t i = 0; i < len; ++i) out.push_back(p[i]);
  return out;
}

}  // namespace

extern "C" {

const char* am_version(void) { return "1.0.0"; }

const char* am_last_error(void) { return g_last_error.c_str(); }

const char* am_status_string(am_status status) {
  switch (status) {
    case AM_OK: return "ok";
    case AM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case AM_ERR_SHAPE_MISMATCH: return "shape mismatch";
    case AM_ERR_IO: return "i/o error";
    case AM_ERR_BAD_MAGIC: return "bad magic";
    case AM_ERR_UNSUPPORTED_VERSION: return "unsupported version";
    case AM_ERR_TRUNCATED: return "truncated file";
    case AM_ERR_DIVERGED: return "training diverged";
    case AM_ERR_TASK_MISMATCH: return "task mismatch";
    case AM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void am_train_config_defaults(am_task task, am_mode mode,
                              am_train_config* out) {
  if (out == nullptr) return;
  const Task t = task == AM_TASK_SORT ? Task::kSort : Task::kKv;
  const TrainMode m =
      mode == AM_MODE_STANDARD ? TrainMode::kStandard : TrainMode::kRandomized;
  *out = from_train_config(TrainConfig::defaults(t, m));
}

am_status am_train_config_validate(const am_train_config* config) {
  return guarded([&] {
    need(config, "config");
    to_train_config(*config).validate();
  });
}

am_status am_train(const am_train_config* config, const char* metrics_path,
                   am_epoch_callback callback, void* user, am_checkpoint** out,
                   am_train_report* report) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    *out = nullptr;
    const TrainConfig tc = to_train_config(*config);
    tc.validate();
    std::unique_ptr<MetricsCsvWriter> writer;
    if (metrics_path != nullptr && *metrics_path != '\0') {
      writer = std::make_unique<MetricsCsvWriter>(metrics_path);
    }
    const TrainResult run = train(tc, [&](const EpochRow& row) {
      if (writer) writer->append(row);
      if (callback != nullptr) {
        const am_epoch_row r{row.epoch, row.loss, row.train_acc, row.val_acc};
        callback(&r, user);
      }
    });
    auto ckpt = std::make_shared<Checkpoint>();
    ckpt->config = run.model;
    ckpt->task = tc.task;
    ckpt->trained_n = tc.n;
    ckpt->seed = tc.seed;
    ckpt->epochs_run = run.report.epochs_run;
    ckpt->params = run.params;
    if (report != nullptr) {
      report->epochs_run = run.report.epochs_run;
      report->final_train_acc = run.report.final_train_acc;
      report->final_val_acc = run.report.final_val_acc;
      report->stop_reason = run.report.stop_reason == StopReason::kThreshold
                                ? AM_STOPPED_AT_THRESHOLD
                                : AM_STOPPED_AT_MAX_EPOCHS;
    }
    *out = new am_checkpoint{std::move(ckpt)};
  });
}

am_status am_checkpoint_load(const char* path, am_checkpoint** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto ckpt = std::make_shared<Checkpoint>(load_checkpoint(path));
    *out = new am_checkpoint{std::move(ckpt)};
  });
}

am_status am_checkpoint_save(const am_checkpoint* checkpoint,
                             const char* path) {
  return guarded([&] {
    need(checkpoint, "checkpoint");
    need(path, "path");
    save_checkpoint(path, *checkpoint->value);
  });
}

am_status am_checkpoint_info(const am_checkpoint* checkpoint,
                             am_model_info* out) {
  return guarded([&] {
    need(checkpoint, "checkpoint");
    need(out, "out");
    const Checkpoint& c = *checkpoint->value;
    out->task = from_task(c.task);
    out->key_dim = static_cast<uint32_t>(c.config.key_dim);
    out->value_dim = static_cast<uint32_t>(c.config.value_dim);
    out->query_dim = static_cast<uint32_t>(c.config.query_dim);
    out->hidden_dim = static_cast<uint32_t>(c.config.hidden_dim);
    out->memory_dim = static_cast<uint32_t>(c.config.memory_dim);
    out->num_classes = static_cast<uint32_t>(c.config.num_classes);
    out->leaky_slope = c.config.leaky_slope;
    out->trained_n = static_cast<uint32_t>(c.trained_n);
    out->seed = c.seed;
    out->epochs_run = c.epochs_run;
  });
}

void am_checkpoint_free(am_checkpoint* checkpoint) { delete checkpoint; }

am_status am_session_open(const am_checkpoint* checkpoint, uint64_t seed,
                          am_session** out) {
  return guarded([&] {
    need(checkpoint, "checkpoint");
    need(out, "out");
    *out = nullptr;
    Rng rng = Rng::derive(seed, Stream::kSession, 0, 0);
    *out = new am_session{Session::open(checkpoint->value, rng)};
  });
}

am_status am_session_append(am_session* session, const float* key,
                            size_t key_len, int32_t value) {
  return guarded([&] {
    need(session, "session");
    session->value.append(
        key_tensor(session->value.checkpoint(), key, key_len), value);
  });
}

am_status am_session_lookup(const am_session* session, const float* key,
                            size_t key_len, int32_t* value,
                            float* probabilities, size_t probabilities_len) {
  return guarded([&] {
    need(session, "session");
    need(value, "value");
    const Checkpoint& ckpt = session->value.checkpoint();
    if (probabilities != nullptr) {
      require(probabilities_len == ckpt.config.num_classes,
              ErrorCode::kShapeMismatch,
              "probability buffer must hold " +
                  std::to_string(ckpt.config.num_classes) + " entries");
    }
    const LookupResult r =
        session->value.lookup(key_tensor(ckpt, key, key_len));
    *value = r.value;
    if (probabilities != nullptr) {
      std::memcpy(probabilities, r.probabilities.raw(),
                  probabilities_len * sizeof(float));
    }
  });
}

am_status am_session_append_count(const am_session* session, uint64_t* out) {
  return guarded([&] {
    need(session, "session");
    need(out, "out");
    *out = session->value.append_count();
  });
}

am_status am_session_memory(const am_session* session, float* out,
                            size_t len) {
  return guarded([&] {
    need(session, "session");
    need(out, "out");
    const std::span<const float> data = session->value.memory().values.data();
    require(len == data.size(), ErrorCode::kShapeMismatch,
            "memory buffer must hold " + std::to_string(data.size()) +
                " entries");
    std::memcpy(out, data.data(), len * sizeof(float));
  });
}

am_status am_session_save(const am_session* session, const char* path) {
  return guarded([&] {
    need(session, "session");
    need(path, "path");
    save_memory(path, session->value);
  });
}

am_status am_session_load(const am_checkpoint* checkpoint, const char* path,
                          am_session** out) {
  return guarded([&] {
    need(checkpoint, "checkpoint");
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new am_session{load_memory(path, checkpoint->value)};
  });
}

void am_session_free(am_session* session) { delete session; }

void am_eval_options_defaults(am_experiment experiment, am_eval_options* out) {
  if (out == nullptr) return;
  *out = am_eval_options{};
  out->experiment = experiment;
  out->trials = kDefaultTrials;
}

am_status am_eval(const am_checkpoint* checkpoint,
                  const am_eval_options* options, double* headline) {
  return guarded([&] {
    need(checkpoint, "checkpoint");
    need(options, "options");
    need(headline, "headline");
    const Checkpoint& c = *checkpoint->value;
    const std::size_t trials = options->trials;
    const std::uint64_t seed = options->seed;
    const std::size_t trained_n = c.trained_n;
    SweepResult result;
    switch (options->experiment) {
      case AM_EXP_TEST: {
        require_task(c, Task::kKv, "test accuracy");
        const std::size_t n = options->n_inputs ? options->n_inputs : trained_n;
        const double acc =
            test_accuracy(c.params, c.config, c.task, n, trials, seed);
        result = {"test", {{static_cast<double>(n), acc, trials, {}}}};
        *headline = acc;
        break;
      }
      case AM_EXP_CAPACITY: {
        require_task(c, Task::kKv, "capacity sweep");
        const auto counts = options->counts
                                ? to_sizes(options->counts, options->counts_len)
                                : default_capacity_counts();
        result = capacity_sweep(c.params, c.config, c.task, counts, trials, seed);
        *headline = mean_accuracy(result);
        break;
      }
      case AM_EXP_POSITIONAL: {
        require_task(c, Task::kKv, "positional accuracy");
        const std::size_t n =
            options->n_inputs ? options->n_inputs : 2 * trained_n;
        result = positional_accuracy(c.params, c.config, c.task, n, trials, seed);
        *headline = stddev_accuracy(result);
        break;
      }
      case AM_EXP_SORT_EXACT: {
        require_task(c, Task::kSort, "sort exact-match");
        const std::size_t n = options->n_inputs ? options->n_inputs : trained_n;
        const SortAccuracy acc =
            sort_exact_match(c.params, c.config, n, trials, seed);
        result = {"sort-exact", {{static_cast<double>(n), acc.exact_match, trials, {}}}};
        *headline = acc.exact_match;
        break;
      }
      case AM_EXP_OVERFIT: {
        require_task(c, Task::kKv, "overfit control");
        TrainConfig base = TrainConfig::defaults(Task::kKv, TrainMode::kStandard);
        base.hidden_dim = c.config.hidden_dim;
        base.key_dim = c.config.key_dim;
        base.leaky_slope = c.config.leaky_slope;
        base.seed = seed;
        if (options->batch_size) base.batch_size = options->batch_size;
        if (options->max_epochs) base.max_epochs = options->max_epochs;
        const auto ns = options->n_values
                            ? to_sizes(options->n_values, options->n_values_len)
                            : std::vector<std::size_t>{trained_n};
        result = overfit_control(base, ns);
        *headline = mean_accuracy(result);
        break;
      }
      default:
        fail(ErrorCode::kInvalidArgument, "unknown experiment");
    }
    if (options->out_path != nullptr && *options->out_path != '\0') {
      write_sweep_csv(options->out_path, result,
                      options->checkpoint_label ? options->checkpoint_label : "");
    }
  });
}

am_status am_sort(const am_checkpoint* checkpoint, const double* numbers,
                  size_t n, uint64_t seed, double* sorted_out, int* complete) {
  return guarded([&] {
    need(checkpoint, "checkpoint");
    need(numbers, "numbers");
    need(sorted_out, "sorted_out");
    const Checkpoint& c = *checkpoint->value;
    require_task(c, Task::kSort, "sorting");
    Rng rng = Rng::derive(seed, Stream::kSort, 0, 0);
    const SortOutput out =
        sort_numbers(c.params, c.config, std::span(numbers, n), rng);
    std::copy(out.sorted.begin(), out.sorted.end(), sorted_out);
    if (complete != nullptr) *complete = out.complete ? 1 : 0;
  });
}

void am_gradcheck_defaults(am_gradcheck_options* out) {
  if (out == nullptr) return;
  const GradcheckOptions d;
  out->trials = d.trials;
  out->eps = d.eps;
  out->seed = d.seed;
  out->double_precision = d.double_precision ? 1 : 0;
  out->tolerance = d.tolerance;
}

am_status am_gradcheck(const am_gradcheck_options* options,
                       am_gradcheck_result* out) {
  return guarded([&] {
    need(options, "options");
    need(out, "out");
    require(options->trials >= 1, ErrorCode::kInvalidArgument,
            "trials must be >= 1");
    require(options->eps > 0 && std::isfinite(options->eps),
            ErrorCode::kInvalidArgument, "eps must be positive");
    GradcheckOptions o;
    o.trials = options->trials;
    o.eps = options->eps;
    o.seed = options->seed;
    o.double_precision = options->double_precision != 0;
    o.tolerance = options->tolerance;
    const GradcheckReport r = run_gradcheck(o);
    *out = am_gradcheck_result{};
    out->max_rel_error = r.max_rel_error;
    out->passed = r.passed ? 1 : 0;
    for (const auto& t : r.trials) {
      out->coordinates += t.coordinates;
      out->refined += t.refined;
      out->skipped += t.skipped;
    }
  });
}

am_status am_dump_episode(am_task task, uint32_t n, uint32_t key_dim,
                          uint64_t seed, char* buf, size_t buf_len,
                          size_t* needed) {
  return guarded([&] {
    need(needed, "needed");
    require(n >= 1, ErrorCode::kInvalidArgument, "n must be >= 1");
    const Task t = to_task(task);
    Rng rng = Rng::derive(seed, Stream::kTest, n, 0);
    const Episode ep = t == Task::kSort
                           ? gen_sort_episode(n, rng)
                           : gen_kv_episode(n, key_dim ? key_dim : 16, rng);
    std::ostringstream text;
    dump_episode(text, ep);
    const std::string s = text.str();
    *needed = s.size() + 1;
    require(buf != nullptr && buf_len >= s.size() + 1,
            ErrorCode::kInvalidArgument, "buffer too small");
    std::memcpy(buf, s.c_str(), s.size() + 1);
  });
}

}  // extern "C"
