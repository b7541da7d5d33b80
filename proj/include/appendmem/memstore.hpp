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
#include <memory>
#include <string>
#include <string_view>

#include "appendmem/episode.hpp"
#include "appendmem/model.hpp"
#include "appendmem/rng.hpp"

namespace appendmem {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// A trained, frozen Memorizer-Recaller plus provenance.
struct Checkpoint {
  ModelConfig config;
  Task task = Task::kKv;
  std::size_t trained_n = 0;  // episode length used in training
  std::uint64_t seed = 0;
  std::uint64_t epochs_run = 0;
  ModelParams params;

  bool operator==(const Checkpoint&) const = default;
};

// Layout (all integers little-endian):
//   "AMEM" | u32 version | u32 len, config text (sorted key=value lines) |
//   per tensor: u32 len, name | u32 rank | u32 dims[rank] | f32 data[]
std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

struct LookupResult {
  int value = 0;
  Tensor probabilities;  // [num_classes]
};

// A frozen checkpoint plus a live memory vector. Appends fold pairs into the
// memory with the Memorizer; lookups run the Recaller. Parameters are never
// modified. Single writer: appends must not overlap other calls.
class Session {
 public:
  Session(std::shared_ptr<const Checkpoint> checkpoint, MemoryVector memory,
          std::uint64_t append_count = 0);

  // Fresh m0 drawn from U[-1, 1), as in training.
  static Session open(std::shared_ptr<const Checkpoint> checkpoint, Rng& rng);

  void append(const Tensor& key, int value);
  LookupResult lookup(const Tensor& key) const;

  const MemoryVector& memory() const { return memory_; }
  std::uint64_t append_count() const { return append_count_; }
  const Checkpoint& checkpoint() const { return *checkpoint_; }
  const std::shared_ptr<const Checkpoint>& checkpoint_ptr() const {
    return checkpoint_;
  }

 private:
  std::shared_ptr<const Checkpoint> checkpoint_;
  MemoryVector memory_;
  std::uint64_t append_count_ = 0;
};

// "AMV1" | u32 dim | u64 append_count | f32 data[dim]
std::string serialize_memory(const Session& session);
Session parse_memory(std::string_view bytes,
                     std::shared_ptr<const Checkpoint> checkpoint);

void save_memory(const std::string& path, const Session& session);
Session load_memory(const std::string& path,
                    std::shared_ptr<const Checkpoint> checkpoint);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace appendmem
