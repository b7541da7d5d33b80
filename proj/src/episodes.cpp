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


#include "appendmem/episodes.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <ostream>

#include "appendmem/error.hpp"

namespace appendmem {

const char* task_name(Task task) {
  return task == Task::kSort ? "sort" : "kv";
}

Task parse_task(const std::string& name) {
  if (name == "kv") return Task::kKv;
  if (name == "sort") return Task::kSort;
  fail(ErrorCode::kInvalidArgument, "unknown task '" + name + "'");
}

Episode gen_kv_episode(std::size_t n, std::size_t key_dim, Rng& rng,
                       std::size_t num_classes) {
  require(n >= 1 && key_dim >= 1, ErrorCode::kInvalidArgument,
          "gen_kv_episode: n and key_dim must be positive");
  Episode ep;
  ep.key_dim = key_dim;
  ep.query_dim = key_dim;
  ep.keys.resize(n * key_dim);
  ep.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < key_dim; ++j) {
      ep.keys[i * key_dim + j] = rng.uniform(0.0f, kKeyUpperBound);
    }
    ep.values[i] = static_cast<int>(rng.uniform_index(num_classes));
  }
  ep.queries = ep.keys;
  ep.targets = ep.values;
  return ep;
}

Episode gen_sort_episode(std::size_t n, Rng& rng, std::size_t num_classes) {
  require(n >= 1, ErrorCode::kInvalidArgument, "gen_sort_episode: n must be >= 1");
  require(n <= num_classes, ErrorCode::kInvalidArgument,
          "gen_sort_episode: n = " + std::to_string(n) + " exceeds the " +
              std::to_string(num_classes) + " distinct value tags");
  Episode ep;
  ep.key_dim = 1;
  ep.query_dim = 1;
  ep.keys.resize(n);
  for (float& k : ep.keys) k = rng.uniform(0.0f, static_cast<float>(n));

  // Partial Fisher-Yates over the tag pool.
  std::vector<int> pool(num_classes);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.uniform_index(num_classes - i);
    std::swap(pool[i], pool[j]);
  }
  ep.values.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ep.keys[a] < ep.keys[b];
  });
  ep.queries.resize(n);
  ep.targets.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    ep.queries[r] = static_cast<float>(r);
    ep.targets[r] = ep.values[order[r]];
  }
  return ep;
}

MemoryVector sample_m0(std::size_t memory_dim, Rng& rng) {
  require(memory_dim >= 1, ErrorCode::kInvalidArgument,
          "sample_m0: memory_dim must be positive");
  Tensor m({memory_dim});
  for (float& v : m.data()) v = rng.uniform(-1.0f, 1.0f);
  return {std::move(m)};
}

Batch gen_batch(const BatchSpec& spec, std::uint64_t seed, Stream stream,
                std::uint64_t index) {
  return gen_batch_range(spec, seed, stream, index, 0, spec.batch_size);
}

Batch gen_batch_range(const BatchSpec& spec, std::uint64_t seed, Stream stream,
                      std::uint64_t index, std::size_t first, std::size_t count) {
  require(count >= 1, ErrorCode::kInvalidArgument,
          "gen_batch: batch_size must be positive");
  Batch batch;
  batch.task = spec.task;
  batch.episodes.reserve(count);
  batch.m0.reserve(count);
  for (std::size_t i = first; i < first + count; ++i) {
    Rng rng = Rng::derive(seed, stream, index, i);
    batch.episodes.push_back(
        spec.task == Task::kSort
            ? gen_sort_episode(spec.n, rng, spec.num_classes)
            : gen_kv_episode(spec.n, spec.key_dim, rng, spec.num_classes));
    batch.m0.push_back(sample_m0(spec.memory_dim, rng));
  }
  return batch;
}

std::string format_key(std::span<const float> key) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < key.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(key[i]));
    if (i) out += ',';
    out += buf;
  }
  return out;
}

std::string format_pair(std::span<const float> key, int value) {
  return format_key(key) + '\t' + std::to_string(value);
}

std::vector<float> parse_key(const std::string& text) {
  std::vector<float> key;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const std::string field = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    const char* begin = field.c_str();
    char* end = nullptr;
    errno = 0;
    const float v = std::strtof(begin, &end);
    while (end && (*end == ' ')) ++end;
    require(!field.empty() && end != begin && *end == '\0' && errno == 0 &&
                std::isfinite(v),
            ErrorCode::kInvalidArgument, "malformed number '" + field + "'");
    key.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return key;
}

std::vector<KeyValuePair> read_pairs(std::istream& in) {
  std::vector<KeyValuePair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::size_t tab = line.find('\t');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (tab == std::string::npos) {
      fail(ErrorCode::kInvalidArgument,
           where + "expected '<key_csv><TAB><value>'");
    }
    KeyValuePair pair;
    try {
      pair.key = parse_key(line.substr(0, tab));
    } catch (const Error& e) {
      fail(ErrorCode::kInvalidArgument, where + e.what());
    }
    const std::string value_text = line.substr(tab + 1);
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(value_text.c_str(), &end, 10);
    require(!value_text.empty() && *end == '\0' && errno == 0 && v >= 0 &&
                v <= 1'000'000,
            ErrorCode::kInvalidArgument,
            where + "malformed value '" + value_text + "'");
    pair.value = static_cast<int>(v);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

void dump_episode(std::ostream& out, const Episode& episode) {
  for (std::size_t i = 0; i < episode.size(); ++i) {
    out << format_pair(episode.key(i), episode.values[i]) << '\n';
  }
}

}  // namespace appendmem
