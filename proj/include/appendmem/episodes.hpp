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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "appendmem/episode.hpp"
#include "appendmem/rng.hpp"

namespace appendmem {

inline constexpr std::size_t kNumValueClasses = 10;
inline constexpr float kKeyUpperBound = 9.0f;

// Keys i.i.d. U[0, 9) per element, values i.i.d. uniform on {0..classes-1}.
// Queries are the keys, targets the values.
Episode gen_kv_episode(std::size_t n, std::size_t key_dim, Rng& rng,
                       std::size_t num_classes = kNumValueClasses);

// Scalar keys i.i.d. U[0, n); values drawn without replacement from
// {0..classes-1}; query r (as a real) targets the value paired with the r-th
// smallest key. Requires 1 <= n <= num_classes.
Episode gen_sort_episode(std::size_t n, Rng& rng,
                         std::size_t num_classes = kNumValueClasses);

// Entries i.i.d. U[-1, 1).
MemoryVector sample_m0(std::size_t memory_dim, Rng& rng);

struct BatchSpec {
  Task task = Task::kKv;
  std::size_t n = 2;
  std::size_t batch_size = 1024;
  std::size_t key_dim = 16;
  std::size_t memory_dim = 256;
  std::size_t num_classes = kNumValueClasses;
};

// Episode i (and its m0) is drawn from its own generator seeded by
// (seed, stream, index, i), so it does not depend on batch_size or on the
// other episodes.
Batch gen_batch(const BatchSpec& spec, std::uint64_t seed, Stream stream,
                std::uint64_t index);

// Episodes first .. first+count-1 of the same family as gen_batch; spec's
// batch_size is ignored.
Batch gen_batch_range(const BatchSpec& spec, std::uint64_t seed, Stream stream,
                      std::uint64_t index, std::size_t first, std::size_t count);

// Text form of one (key, value) pair: comma-separated key, a tab, the value.
struct KeyValuePair {
  std::vector<float> key;
  int value = 0;
  bool operator==(const KeyValuePair&) const = default;
};

std::string format_key(std::span<const float> key);
std::string format_pair(std::span<const float> key, int value);

// Parses a comma-separated list of reals. Throws kInvalidArgument.
std::vector<float> parse_key(const std::string& text);

// One pair per non-empty line. Throws kInvalidArgument naming the offending
// line number.
std::vector<KeyValuePair> read_pairs(std::istream& in);

// Writes the episode's pairs in memorization order.
void dump_episode(std::ostream& out, const Episode& episode);

}  // namespace appendmem
