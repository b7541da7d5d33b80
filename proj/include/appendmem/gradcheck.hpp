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
#include <vector>

#include "appendmem/model.hpp"

namespace appendmem {

// Tiny instances: hidden = memory = 8, key_dim = 4, 10 classes.
ModelConfig gradcheck_config();

struct GradcheckOptions {
  int trials = 10;
  double eps = 1e-3;
  std::uint64_t seed = 0;
  // Run both the analytic and the finite-difference gradient in double.
  // In float, central differences at eps = 1e-3 carry rounding error of
  // roughly 1e-4 absolute, which swamps the relative tolerance.
  bool double_precision = true;
  double tolerance = 1e-3;
};

struct GradcheckTrial {
  std::size_t episode_length = 0;
  std::size_t coordinates = 0;
  // Coordinates whose +-eps probe crossed a leaky-ReLU kink and were
  // re-probed with a smaller step.
  std::size_t refined = 0;
  // Coordinates that stayed on a kink even at the smallest step; excluded.
  std::size_t skipped = 0;
  double max_rel_error = 0;
};

struct GradcheckReport {
  std::vector<GradcheckTrial> trials;
  double max_rel_error = 0;
  bool passed = false;
};

// Compares episode_loss_and_grads against central finite differences on
// random tiny models, with episode lengths cycling through 1, 2, 3.
GradcheckReport run_gradcheck(const GradcheckOptions& options);

}  // namespace appendmem
