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
#include <span>
#include <string>
#include <vector>

#include "appendmem/tensor.hpp"

namespace appendmem {

enum class Task { kKv, kSort };

const char* task_name(Task task);
Task parse_task(const std::string& name);

// The Appendable Memory vector m_t.
struct MemoryVector {
  Tensor values;  // [memory_dim]

  std::size_t dim() const { return values.size(); }
  bool operator==(const MemoryVector&) const = default;
};

// One sample: n (key, value) pairs to memorize followed by n recall
// queries. For the key-value task the queries are the keys themselves and
// the targets are the values; for sorting the queries are ranks 0..n-1 and
// the target of rank r is the value paired with the r-th smallest key.
struct Episode {
  std::size_t key_dim = 0;
  std::size_t query_dim = 0;
  std::vector<float> keys;     // n x key_dim
  std::vector<int> values;     // n
  std::vector<float> queries;  // n x query_dim
  std::vector<int> targets;    // n

  std::size_t size() const { return values.size(); }
  std::span<const float> key(std::size_t i) const {
    return std::span<const float>(keys).subspan(i * key_dim, key_dim);
  }
  std::span<const float> query(std::size_t i) const {
    return std::span<const float>(queries).subspan(i * query_dim, query_dim);
  }
  bool operator==(const Episode&) const = default;
};

// Episodes sharing n and dimensions, each with its own initial memory.
struct Batch {
  Task task = Task::kKv;
  std::vector<Episode> episodes;
  std::vector<MemoryVector> m0;

  std::size_t size() const { return episodes.size(); }
  std::size_t episode_length() const {
    return episodes.empty() ? 0 : episodes.front().size();
  }
  bool operator==(const Batch&) const = default;
};

}  // namespace appendmem
