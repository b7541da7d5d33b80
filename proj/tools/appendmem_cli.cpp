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


// appendmem: train, evaluate and deploy Memorizer-Recaller models.
//
// Exit codes: 0 success, 1 check failure or divergence, 2 usage or input
// error, 3 training stopped at max epochs without reaching the threshold.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "appendmem/appendmem.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitThresholdNotReached = 3;

// Smallest step that still perturbs a float32 parameter of magnitude ~1.
constexpr double kFloat32Resolution = 1.1920928955078125e-07;

struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(am_status status) {
  switch (status) {
    case AM_OK: return kExitOk;
    case AM_ERR_DIVERGED:
    case AM_ERR_INTERNAL: return kExitCheckFailed;
    default: return kExitUsage;
  }
}

void check(am_status status, const std::string& context) {
  if (status == AM_OK) return;
  std::string msg = context + ": " + am_last_error();
  if (*am_last_error() == '\0') msg = context + ": " + am_status_string(status);
  throw Failure{exit_code_for(status), msg};
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string fmt(float v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", static_cast<double>(v));
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Parses a comma-separated list of finite reals; nullopt on any defect.
template <class T>
std::optional<std::vector<T>> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    T v{};
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      return std::nullopt;
    }
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(v)) return std::nullopt;
    }
    out.push_back(v);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

bool file_exists(const std::string& path) {
  std::ifstream f(path);
  return static_cast<bool>(f);
}

// ---- config file -----------------------------------------------------------

// Inserts `--key value` for every key=value line of the --config file whose
// key was not given on the command line, so flags win over the file and the
// file wins over built-in defaults.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw Failure{kExitUsage, "cannot open config file '" + path + "'"};
  auto given = [&](const std::string& key) {
    for (const auto& a : args) {
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    }
    return false;
  };
  std::map<std::string, std::string> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Failure{kExitUsage, path + ":" + std::to_string(line_no) +
                                    ": expected key=value"};
    }
    std::string key = trim(line.substr(0, eq));
    while (!key.empty() && key[0] == '-') key.erase(0, 1);
    if (key.empty() || key == "config") {
      throw Failure{kExitUsage,
                    path + ":" + std::to_string(line_no) + ": invalid key"};
    }
    entries[key] = trim(line.substr(eq + 1));
  }
  for (const auto& [key, value] : entries) {
    if (given(key)) continue;
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

// ---- audit -------------------------------------------------------------------

class Audit {
 public:
  explicit Audit(std::string command) { line_ = "config: command=" + command; }
  Audit& add(const std::string& key, const std::string& value) {
    line_ += " " + key + "=" + value;
    return *this;
  }
  Audit& add(const std::string& key, double value) { return add(key, fmt(value)); }
  Audit& add(const std::string& key, std::uint64_t value) {
    return add(key, std::to_string(value));
  }
  void print() const { std::cout << line_ << std::endl; }

 private:
  std::string line_;
};

const char* task_str(am_task t) { return t == AM_TASK_SORT ? "sort" : "kv"; }
const char* mode_str(am_mode m) {
  return m == AM_MODE_STANDARD ? "standard" : "randomized";
}
const char* metric_str(am_stop_metric m) {
  return m == AM_STOP_TRAIN_ACC ? "train_acc" : "val_acc";
}

struct CheckpointHandle {
  am_checkpoint* ptr = nullptr;
  ~CheckpointHandle() { am_checkpoint_free(ptr); }
};

struct SessionHandle {
  am_session* ptr = nullptr;
  ~SessionHandle() { am_session_free(ptr); }
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("APPENDMEM_SEED"); env && *env) {
    std::uint64_t v = 0;
    const std::string s = env;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Failure{kExitUsage, "APPENDMEM_SEED must be a non-negative integer"};
    }
    return v;
  }
  return 0;
}

// ---- train -------------------------------------------------------------------

struct TrainArgs {
  std::string task = "kv";
  std::string mode = "randomized";
  std::optional<std::uint32_t> n, hidden, batch, key_dim;
  std::optional<double> lr, stop_acc;
  std::optional<std::string> stop_metric;
  std::optional<std::uint64_t> max_epochs, eval_every, seed;
  std::optional<float> leaky_slope;
  std::string checkpoint;
  std::string metrics;
};

void progress(const am_epoch_row* row, void* user) {
  const auto every = *static_cast<const std::uint64_t*>(user);
  if (row->epoch % every != 0) return;
  std::fprintf(stderr, "epoch %llu loss %.6f train_acc %.4f val_acc %.4f\n",
               static_cast<unsigned long long>(row->epoch), row->loss,
               row->train_acc, row->val_acc);
}

int cmd_train(const TrainArgs& a) {
  const am_task task = a.task == "sort" ? AM_TASK_SORT : AM_TASK_KV;
  const am_mode mode =
      a.mode == "standard" ? AM_MODE_STANDARD : AM_MODE_RANDOMIZED;
  am_train_config cfg;
  am_train_config_defaults(task, mode, &cfg);
  if (a.n) cfg.n = *a.n;
  if (a.hidden) cfg.hidden_dim = *a.hidden;
  if (a.batch) cfg.batch_size = *a.batch;
  if (a.key_dim) cfg.key_dim = *a.key_dim;
  if (a.lr) cfg.lr = *a.lr;
  if (a.stop_acc) cfg.stop_threshold = *a.stop_acc;
  if (a.stop_metric) {
    cfg.stop_metric =
        *a.stop_metric == "train_acc" ? AM_STOP_TRAIN_ACC : AM_STOP_VAL_ACC;
  }
  if (a.max_epochs) cfg.max_epochs = *a.max_epochs;
  if (a.eval_every) cfg.eval_every = *a.eval_every;
  if (a.leaky_slope) cfg.leaky_slope = *a.leaky_slope;
  cfg.seed = resolve_seed(a.seed);
  check(am_train_config_validate(&cfg), "invalid training configuration");

  Audit("train")
      .add("task", task_str(cfg.task))
      .add("mode", mode_str(cfg.mode))
      .add("n", std::uint64_t{cfg.n})
      .add("hidden", std::uint64_t{cfg.hidden_dim})
      .add("key_dim", std::uint64_t{cfg.key_dim})
      .add("batch", std::uint64_t{cfg.batch_size})
      .add("lr", cfg.lr)
      .add("stop_metric", metric_str(cfg.stop_metric))
      .add("stop_acc", cfg.stop_threshold)
      .add("max_epochs", cfg.max_epochs)
      .add("eval_every", cfg.eval_every)
      .add("leaky_slope", fmt(cfg.leaky_slope))
      .add("seed", cfg.seed)
      .add("checkpoint", a.checkpoint)
      .add("metrics", a.metrics.empty() ? "-" : a.metrics)
      .print();

  CheckpointHandle ckpt;
  am_train_report report{};
  std::uint64_t every = cfg.eval_every;
  check(am_train(&cfg, a.metrics.empty() ? nullptr : a.metrics.c_str(),
                 progress, &every, &ckpt.ptr, &report),
        "training failed");
  check(am_checkpoint_save(ckpt.ptr, a.checkpoint.c_str()),
        "cannot save checkpoint");
  const bool reached = report.stop_reason == AM_STOPPED_AT_THRESHOLD;
  std::cout << "epochs_run=" << report.epochs_run
            << " final_train_acc=" << fmt(report.final_train_acc)
            << " final_val_acc=" << fmt(report.final_val_acc)
            << " stop_reason=" << (reached ? "threshold" : "max_epochs")
            << std::endl;
  return reached ? kExitOk : kExitThresholdNotReached;
}

// ---- eval --------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string experiment = "test";
  std::uint64_t trials = 1024;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::uint32_t n_inputs = 0;
  std::string counts;
  std::string n_values;
  std::uint32_t batch = 0;
  std::uint64_t max_epochs = 0;
};

int cmd_eval(const EvalArgs& a) {
  static const std::map<std::string, am_experiment> kExperiments = {
      {"test", AM_EXP_TEST},
      {"capacity", AM_EXP_CAPACITY},
      {"positional", AM_EXP_POSITIONAL},
      {"sort-exact", AM_EXP_SORT_EXACT},
      {"overfit", AM_EXP_OVERFIT}};
  am_eval_options opts;
  am_eval_options_defaults(kExperiments.at(a.experiment), &opts);
  opts.trials = a.trials;
  opts.seed = resolve_seed(a.seed);
  opts.n_inputs = a.n_inputs;
  std::vector<std::uint32_t> counts, n_values;
  if (!a.counts.empty()) {
    auto parsed = parse_list<std::uint32_t>(a.counts);
    if (!parsed) throw Failure{kExitUsage, "--counts: expected integers"};
    counts = *parsed;
    opts.counts = counts.data();
    opts.counts_len = counts.size();
  }
  if (!a.n_values.empty()) {
    auto parsed = parse_list<std::uint32_t>(a.n_values);
    if (!parsed) throw Failure{kExitUsage, "--n-values: expected integers"};
    n_values = *parsed;
    opts.n_values = n_values.data();
    opts.n_values_len = n_values.size();
  }
  opts.batch_size = a.batch;
  opts.max_epochs = a.max_epochs;
  opts.out_path = a.out.empty() ? nullptr : a.out.c_str();
  opts.checkpoint_label = a.checkpoint.c_str();

  Audit("eval")
      .add("checkpoint", a.checkpoint)
      .add("experiment", a.experiment)
      .add("trials", a.trials)
      .add("seed", opts.seed)
      .add("n_inputs", std::uint64_t{a.n_inputs})
      .add("counts", a.counts.empty() ? "default" : a.counts)
      .add("n_values", a.n_values.empty() ? "default" : a.n_values)
      .add("out", a.out.empty() ? "-" : a.out)
      .print();

  CheckpointHandle ckpt;
  check(am_checkpoint_load(a.checkpoint.c_str(), &ckpt.ptr),
        "cannot load checkpoint");
  double headline = 0;
  check(am_eval(ckpt.ptr, &opts, &headline), "evaluation failed");
  const char* label = a.experiment == "positional" ? "positional_std"
                      : a.experiment == "capacity" ? "mean_accuracy"
                      : a.experiment == "sort-exact" ? "exact_match"
                      : a.experiment == "overfit"    ? "mean_val_accuracy"
                                                     : "accuracy";
  std::cout << label << "=" << fmt(headline) << std::endl;
  return kExitOk;
}

// ---- memorize / recall -------------------------------------------------------

struct SessionArgs {
  std::string checkpoint;
  std::string memory;
  std::string in;
  std::string key;
  std::optional<std::uint64_t> seed;
};

struct Pair {
  std::vector<float> key;
  int value;
};

std::vector<Pair> read_pair_lines(std::istream& in) {
  std::vector<Pair> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    auto bad = [&](const std::string& why) {
      return Failure{kExitUsage, "line " + std::to_string(line_no) + ": " + why};
    };
    if (tab == std::string::npos) throw bad("expected key_csv<TAB>value");
    auto key = parse_list<float>(line.substr(0, tab));
    if (!key) throw bad("malformed key");
    const std::string v = trim(line.substr(tab + 1));
    int value = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
      throw bad("malformed value '" + v + "'");
    }
    out.push_back({std::move(*key), value});
  }
  return out;
}

// Resumes the memory file when it exists, otherwise starts a fresh session.
void open_session(const CheckpointHandle& ckpt, const std::string& memory,
                  std::uint64_t seed, SessionHandle& session) {
  if (file_exists(memory)) {
    check(am_session_load(ckpt.ptr, memory.c_str(), &session.ptr),
          "cannot load memory");
  } else {
    check(am_session_open(ckpt.ptr, seed, &session.ptr), "cannot open session");
  }
}

int cmd_memorize(const SessionArgs& a) {
  const std::uint64_t seed = resolve_seed(a.seed);
  Audit("memorize")
      .add("checkpoint", a.checkpoint)
      .add("memory", a.memory)
      .add("in", a.in.empty() ? "-" : a.in)
      .add("seed", seed)
      .print();
  std::vector<Pair> pairs;
  if (a.in.empty() || a.in == "-") {
    pairs = read_pair_lines(std::cin);
  } else {
    std::ifstream in(a.in);
    if (!in) throw Failure{kExitUsage, "cannot open input '" + a.in + "'"};
    pairs = read_pair_lines(in);
  }
  CheckpointHandle ckpt;
  check(am_checkpoint_load(a.checkpoint.c_str(), &ckpt.ptr),
        "cannot load checkpoint");
  SessionHandle session;
  open_session(ckpt, a.memory, seed, session);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    check(am_session_append(session.ptr, pairs[i].key.data(),
                            pairs[i].key.size(), pairs[i].value),
          "pair " + std::to_string(i + 1));
  }
  check(am_session_save(session.ptr, a.memory.c_str()), "cannot save memory");
  std::uint64_t count = 0;
  check(am_session_append_count(session.ptr, &count), "session");
  std::cout << "appended=" << pairs.size() << " total=" << count << std::endl;
  return kExitOk;
}

int cmd_recall(const SessionArgs& a) {
  const std::uint64_t seed = resolve_seed(a.seed);
  Audit("recall")
      .add("checkpoint", a.checkpoint)
      .add("memory", a.memory)
      .add("key", a.key)
      .add("seed", seed)
      .print();
  auto key = parse_list<float>(a.key);
  if (!key) throw Failure{kExitUsage, "--key: expected comma-separated reals"};
  CheckpointHandle ckpt;
  check(am_checkpoint_load(a.checkpoint.c_str(), &ckpt.ptr),
        "cannot load checkpoint");
  am_model_info info{};
  check(am_checkpoint_info(ckpt.ptr, &info), "checkpoint");
  SessionHandle session;
  open_session(ckpt, a.memory, seed, session);
  std::vector<float> probs(info.num_classes);
  std::int32_t value = 0;
  check(am_session_lookup(session.ptr, key->data(), key->size(), &value,
                          probs.data(), probs.size()),
        "lookup failed");
  std::cout << "class=" << value << "\n";
  std::cout << "probabilities=";
  for (std::size_t i = 0; i < probs.size(); ++i) {
    std::cout << (i ? "," : "") << fmt(probs[i]);
  }
  std::cout << std::endl;
  return kExitOk;
}

// ---- sort --------------------------------------------------------------------

struct SortArgs {
  std::string checkpoint;
  std::string numbers;
  std::optional<std::uint64_t> seed;
};

int cmd_sort(const SortArgs& a) {
  const std::uint64_t seed = resolve_seed(a.seed);
  Audit("sort")
      .add("checkpoint", a.checkpoint)
      .add("numbers", a.numbers)
      .add("seed", seed)
      .print();
  auto numbers = parse_list<double>(a.numbers);
  if (!numbers) {
    throw Failure{kExitUsage, "--numbers: expected comma-separated reals"};
  }
  CheckpointHandle ckpt;
  check(am_checkpoint_load(a.checkpoint.c_str(), &ckpt.ptr),
        "cannot load checkpoint");
  am_model_info info{};
  check(am_checkpoint_info(ckpt.ptr, &info), "checkpoint");
  if (info.task != AM_TASK_SORT) {
    throw Failure{kExitUsage, "checkpoint holds a kv model, not a sort model"};
  }
  if (numbers->size() > info.trained_n) {
    throw Failure{kExitUsage, "got " + std::to_string(numbers->size()) +
                                  " numbers but the model was trained on n=" +
                                  std::to_string(info.trained_n)};
  }
  std::vector<double> sorted(numbers->size());
  int complete = 0;
  check(am_sort(ckpt.ptr, numbers->data(), numbers->size(), seed,
                sorted.data(), &complete),
        "sort failed");
  for (double v : sorted) std::cout << fmt(v) << "\n";
  std::cout.flush();
  if (!complete) {
    std::cerr << "warning: the model picked the same input for more than "
                 "one rank\n";
  }
  return kExitOk;
}

// ---- gradcheck ---------------------------------------------------------------

struct GradcheckArgs {
  int trials = 10;
  double eps = 1e-3;
  std::optional<std::uint64_t> seed;
  std::string precision = "double";
};

int cmd_gradcheck(const GradcheckArgs& a) {
  am_gradcheck_options opts;
  am_gradcheck_defaults(&opts);
  opts.trials = a.trials;
  opts.eps = a.eps;
  opts.seed = resolve_seed(a.seed);
  opts.double_precision = a.precision == "double" ? 1 : 0;
  Audit("gradcheck")
      .add("trials", std::uint64_t(a.trials))
      .add("eps", a.eps)
      .add("precision", a.precision)
      .add("tolerance", opts.tolerance)
      .add("seed", opts.seed)
      .print();
  if (a.eps < kFloat32Resolution) {
    std::cout << "FAIL eps=" << fmt(a.eps)
              << " is below 32-bit float resolution (" << fmt(kFloat32Resolution)
              << "): model parameters are float32, so a perturbation this "
                 "small cannot be represented and finite differences are "
                 "rounding noise"
              << std::endl;
    return kExitCheckFailed;
  }
  am_gradcheck_result r{};
  check(am_gradcheck(&opts, &r), "gradcheck");
  std::cout << (r.passed ? "PASS" : "FAIL")
            << " max_rel_error=" << fmt(r.max_rel_error)
            << " tolerance=" << fmt(opts.tolerance)
            << " coordinates=" << r.coordinates << " refined=" << r.refined
            << " skipped=" << r.skipped << std::endl;
  return r.passed ? kExitOk : kExitCheckFailed;
}

// ---- dump --------------------------------------------------------------------

struct DumpArgs {
  std::string task = "kv";
  std::uint32_t n = 8;
  std::uint32_t key_dim = 16;
  std::optional<std::uint64_t> seed;
};

int cmd_dump(const DumpArgs& a) {
  const std::uint64_t seed = resolve_seed(a.seed);
  const am_task task = a.task == "sort" ? AM_TASK_SORT : AM_TASK_KV;
  // Audit goes to stderr so stdout stays a valid pair file.
  std::cerr << "config: command=dump task=" << a.task << " n=" << a.n
            << " key_dim=" << a.key_dim << " seed=" << seed << std::endl;
  std::size_t needed = 0;
  am_dump_episode(task, a.n, a.key_dim, seed, nullptr, 0, &needed);
  if (needed == 0) check(AM_ERR_INVALID_ARGUMENT, "dump");
  std::string buf(needed, '\0');
  check(am_dump_episode(task, a.n, a.key_dim, seed, buf.data(), buf.size(),
                        &needed),
        "dump");
  std::cout << buf.c_str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Appendable memory: train, evaluate and deploy "
               "Memorizer-Recaller models",
               "appendmem"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(am_version()));

  auto add_config = [](CLI::App* sub) {
    sub->add_option("--config", "key=value file; command-line flags win")
        ->check(CLI::ExistingFile);
  };
  auto add_seed = [](CLI::App* sub, std::optional<std::uint64_t>& seed) {
    sub->add_option("--seed", seed, "RNG seed (default: $APPENDMEM_SEED, else 0)");
  };

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a model");
  add_config(t);
  t->add_option("--task", train.task)->check(CLI::IsMember({"kv", "sort"}));
  t->add_option("--mode", train.mode)
      ->check(CLI::IsMember({"standard", "randomized"}));
  t->add_option("--n", train.n, "Pairs per episode")->check(CLI::PositiveNumber);
  t->add_option("--hidden", train.hidden)->check(CLI::PositiveNumber);
  t->add_option("--batch", train.batch)->check(CLI::PositiveNumber);
  t->add_option("--key-dim", train.key_dim)->check(CLI::PositiveNumber);
  t->add_option("--lr", train.lr)->check(CLI::NonNegativeNumber);
  t->add_option("--stop-acc", train.stop_acc)->check(CLI::Range(0.0, 1.0));
  t->add_option("--stop-metric", train.stop_metric)
      ->check(CLI::IsMember({"train_acc", "val_acc"}));
  t->add_option("--max-epochs", train.max_epochs)->check(CLI::PositiveNumber);
  t->add_option("--eval-every", train.eval_every)->check(CLI::PositiveNumber);
  t->add_option("--leaky-slope", train.leaky_slope);
  add_seed(t, train.seed);
  t->add_option("--checkpoint", train.checkpoint)->required();
  t->add_option("--metrics", train.metrics, "Per-epoch metrics CSV");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Run an evaluation experiment");
  add_config(e);
  e->add_option("--checkpoint", eval.checkpoint)->required();
  e->add_option("--experiment", eval.experiment)
      ->check(CLI::IsMember(
          {"test", "capacity", "positional", "sort-exact", "overfit"}));
  e->add_option("--trials", eval.trials)->check(CLI::PositiveNumber);
  e->add_option("--out", eval.out, "Results CSV");
  add_seed(e, eval.seed);
  e->add_option("--n-inputs", eval.n_inputs, "Pairs per trial (0 = default)");
  e->add_option("--counts", eval.counts, "Capacity input counts, comma-separated");
  e->add_option("--n-values", eval.n_values, "Overfit training sizes");
  e->add_option("--batch", eval.batch, "Overfit batch size (0 = default)");
  e->add_option("--max-epochs", eval.max_epochs, "Overfit epoch cap (0 = default)");

  SessionArgs mem;
  auto* m = app.add_subcommand("memorize", "Append key-value pairs to a memory file");
  add_config(m);
  m->add_option("--checkpoint", mem.checkpoint)->required();
  m->add_option("--memory", mem.memory)->required();
  m->add_option("--in", mem.in, "key_csv<TAB>value lines (default stdin)");
  add_seed(m, mem.seed);

  SessionArgs rec;
  auto* r = app.add_subcommand("recall", "Look up a key in a memory file");
  add_config(r);
  r->add_option("--checkpoint", rec.checkpoint)->required();
  r->add_option("--memory", rec.memory)->required();
  r->add_option("--key", rec.key)->required();
  add_seed(r, rec.seed);

  SortArgs sort;
  auto* s = app.add_subcommand("sort", "Sort numbers with a sorting model");
  add_config(s);
  s->add_option("--checkpoint", sort.checkpoint)->required();
  s->add_option("--numbers", sort.numbers)->required();
  add_seed(s, sort.seed);

  GradcheckArgs gc;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  add_config(g);
  g->add_option("--trials", gc.trials)->check(CLI::PositiveNumber);
  g->add_option("--eps", gc.eps)->check(CLI::PositiveNumber);
  g->add_option("--precision", gc.precision)
      ->check(CLI::IsMember({"double", "float"}));
  add_seed(g, gc.seed);

  DumpArgs dump;
  auto* d = app.add_subcommand("dump", "Print one generated episode");
  add_config(d);
  d->add_option("--task", dump.task)->check(CLI::IsMember({"kv", "sort"}));
  d->add_option("--n", dump.n)->check(CLI::PositiveNumber);
  d->add_option("--key-dim", dump.key_dim)->check(CLI::PositiveNumber);
  add_seed(d, dump.seed);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = apply_config_file(std::move(args));
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& err) {
      const int code = app.exit(err);
      return code == 0 ? kExitOk : kExitUsage;
    }
    if (*t) return cmd_train(train);
    if (*e) return cmd_eval(eval);
    if (*m) return cmd_memorize(mem);
    if (*r) return cmd_recall(rec);
    if (*s) return cmd_sort(sort);
    if (*g) return cmd_gradcheck(gc);
    if (*d) return cmd_dump(dump);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << std::endl;
    return f.exit_code;
  }
  return kExitUsage;
}
