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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "appendmem/episode.hpp"
#include "appendmem/model.hpp"
#include "appendmem/rng.hpp"
#include "appendmem/trainer.hpp"

namespace appendmem {

inline constexpr std::size_t kDefaultTrials = 1024;

struct SweepRow {
  double param = 0;  // input count, position, or training n
  double accuracy = 0;
  std::uint64_t trials = 0;
  std::optional<std::uint64_t> epochs;  // overfit control only

  bool operator==(const SweepRow&) const = default;
};

struct SweepResult {
  std::string experiment;
  std::vector<SweepRow> rows;

  bool operator==(const SweepResult&) const = default;
};

// Trials run in fixed-size chunks of episodes; results do not depend on
// how many trials precede a given one.
BatchEvaluation evaluate_trials(const ModelParams& params,
                                const ModelConfig& config, Task task,
                                std::size_t n_inputs, std::size_t trials,
                                std::uint64_t seed);

// Memorize n_inputs fresh pairs per trial, query every one, and return the
// mean accuracy over trials x n_inputs queries.
double test_accuracy(const ModelParams& params, const ModelConfig& config,
                     Task task, std::size_t n_inputs, std::size_t trials,
                     std::uint64_t seed);

std::vector<std::size_t> default_capacity_counts();

SweepResult capacity_sweep(const ModelParams& params, const ModelConfig& config,
                           Task task, std::span<const std::size_t> counts,
                           std::size_t trials, std::uint64_t seed);

// Accuracy by input position, 1 = oldest, n_inputs = newest.
SweepResult positional_accuracy(const ModelParams& params,
                                const ModelConfig& config, Task task,
                                std::size_t n_inputs, std::size_t trials,
                                std::uint64_t seed);

struct SortAccuracy {
  double exact_match = 0;  // fraction of trials with every rank correct
  double per_query = 0;
};

SortAccuracy sort_exact_match(const ModelParams& params,
                              const ModelConfig& config, std::size_t n,
                              std::size_t trials, std::uint64_t seed);

struct SortOutput {
  std::vector<double> sorted;  // input number chosen for each rank
  std::vector<int> tags;       // tag assigned to each input number
  std::vector<int> predicted;  // tag chosen for each rank
  bool complete = false;       // no input was chosen twice
};

// Tags each number with a distinct value, memorizes the pairs, and reads
// ranks 0..n-1 back: exactly n memorize steps and n recall passes.
SortOutput sort_numbers(const ModelParams& params, const ModelConfig& config,
                        std::span<const double> numbers, Rng& rng);

// Standard-mode training per n; records validation accuracy and epochs at
// the stop. Every other field comes from base.
SweepResult overfit_control(const TrainConfig& base,
                            std::span<const std::size_t> n_values);

// `# experiment=<name> checkpoint=<label>` then `param,accuracy,trials`
// (plus `,epochs` when any row carries epochs).
void write_sweep_csv(const std::string& path, const SweepResult& result,
                     const std::string& checkpoint_label);
SweepResult read_sweep_csv(const std::string& path);

double mean_accuracy(const SweepResult& result);
double stddev_accuracy(const SweepResult& result);

}  // namespace appendmem
