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


#include "appendmem/memstore.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdio>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "appendmem/episodes.hpp"
#include "appendmem/error.hpp"

namespace appendmem {
namespace {

constexpr std::string_view kCheckpointMagic = "AMEM";
constexpr std::string_view kMemoryMagic = "AMV1";
constexpr std::uint32_t kMaxRank = 8;

class Writer {
 public:
  void bytes(std::string_view s) { out_.append(s); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void f32s(std::span<const float> values) {
    for (float f : values) u32(std::bit_cast<std::uint32_t>(f));
  }
  void string(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  bool done() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

  std::string_view bytes(std::size_t n, const char* what) {
    require(remaining() >= n, ErrorCode::kTruncated,
            std::string("file truncated while reading ") + what);
    const std::string_view s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32(const char* what) {
    const std::string_view s = bytes(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[i]);
    return v;
  }
  std::uint64_t u64(const char* what) {
    const std::string_view s = bytes(8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[i]);
    return v;
  }
  std::vector<float> f32s(std::size_t count, const char* what) {
    require(remaining() / 4 >= count, ErrorCode::kTruncated,
            std::string("file truncated while reading ") + what);
    std::vector<float> out(count);
    for (float& f : out) f = std::bit_cast<float>(u32(what));
    return out;
  }
  std::string_view string(const char* what) { return bytes(u32(what), what); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string format_float(float v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return buf;
}

std::string config_text(const Checkpoint& c) {
  // std::map keeps the keys sorted, which makes the text canonical.
  const std::map<std::string, std::string> kv = {
      {"epochs_run", std::to_string(c.epochs_run)},
      {"hidden_dim", std::to_string(c.config.hidden_dim)},
      {"key_dim", std::to_string(c.config.key_dim)},
      {"leaky_slope", format_float(c.config.leaky_slope)},
      {"memory_dim", std::to_string(c.config.memory_dim)},
      {"num_classes", std::to_string(c.config.num_classes)},
      {"query_dim", std::to_string(c.config.query_dim)},
      {"seed", std::to_string(c.seed)},
      {"task", task_name(c.task)},
      {"trained_n", std::to_string(c.trained_n)},
      {"value_dim", std::to_string(c.config.value_dim)},
  };
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t parse_uint(const std::map<std::string, std::string>& kv,
                         const std::string& key) {
  const auto it = kv.find(key);
  require(it != kv.end(), ErrorCode::kInvalidArgument,
          "checkpoint config lacks '" + key + "'");
  const std::string& s = it->second;
  require(!s.empty() && s.find_first_not_of("0123456789") == std::string::npos &&
              s.size() <= 19,
          ErrorCode::kInvalidArgument,
          "checkpoint config '" + key + "' is not an unsigned integer");
  return std::stoull(s);
}

void apply_config_text(std::string_view text, Checkpoint& c) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::kInvalidArgument,
            "malformed checkpoint config line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  c.epochs_run = parse_uint(kv, "epochs_run");
  c.config.hidden_dim = parse_uint(kv, "hidden_dim");
  c.config.key_dim = parse_uint(kv, "key_dim");
  c.config.memory_dim = parse_uint(kv, "memory_dim");
  c.config.num_classes = parse_uint(kv, "num_classes");
  c.config.query_dim = parse_uint(kv, "query_dim");
  c.config.value_dim = parse_uint(kv, "value_dim");
  c.seed = parse_uint(kv, "seed");
  c.trained_n = parse_uint(kv, "trained_n");
  require(kv.count("task") && kv.count("leaky_slope"), ErrorCode::kInvalidArgument,
          "checkpoint config lacks task or leaky_slope");
  c.task = parse_task(kv["task"]);
  c.config.leaky_slope = std::strtof(kv["leaky_slope"].c_str(), nullptr);
  c.config.validate();
}

void check_finite(std::span<const float> values, const char* what) {
  for (float v : values) {
    require(std::isfinite(v), ErrorCode::kInvalidArgument,
            std::string(what) + " holds a non-finite value");
  }
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
  checkpoint.config.validate();
  checkpoint.params.check_shapes(checkpoint.config);
  Writer w;
  w.bytes(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.string(config_text(checkpoint));
  const auto tensors = checkpoint.params.tensors();
  for (std::size_t i = 0; i < kParamTensorCount; ++i) {
    w.string(ModelParams::names()[i]);
    w.u32(static_cast<std::uint32_t>(tensors[i]->rank()));
    for (std::size_t d : tensors[i]->shape()) w.u32(static_cast<std::uint32_t>(d));
    w.f32s(tensors[i]->data());
  }
  return w.take();
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  require(r.remaining() >= 4 && bytes.substr(0, 4) == kCheckpointMagic,
          ErrorCode::kBadMagic, "not a checkpoint file (bad magic)");
  r.bytes(4, "magic");
  const std::uint32_t version = r.u32("version");
  require(version == kCheckpointVersion, ErrorCode::kUnsupportedVersion,
          "unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  apply_config_text(r.string("config block"), c);

  const auto expected = ModelParams::shapes(c.config);
  const auto& names = ModelParams::names();
  auto tensors = c.params.tensors();
  std::array<bool, kParamTensorCount> seen{};
  while (!r.done()) {
    const std::string name(r.string("tensor name"));
    const auto it = std::find(names.begin(), names.end(), name);
    require(it != names.end(), ErrorCode::kShapeMismatch,
            "unknown tensor '" + name + "'");
    const auto idx = static_cast<std::size_t>(it - names.begin());
    require(!seen[idx], ErrorCode::kShapeMismatch,
            "duplicate tensor '" + name + "'");
    const std::uint32_t rank = r.u32("tensor rank");
    require(rank >= 1 && rank <= kMaxRank, ErrorCode::kShapeMismatch,
            "tensor '" + name + "' has invalid rank " + std::to_string(rank));
    std::vector<std::size_t> shape;
    for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(r.u32("tensor dims"));
    require(shape == expected[idx], ErrorCode::kShapeMismatch,
            "tensor '" + name + "' has shape " + Tensor::shape_string(shape) +
                ", configuration implies " + Tensor::shape_string(expected[idx]));
    std::vector<float> data = r.f32s(Tensor::element_count(shape), "tensor data");
    *tensors[idx] = Tensor(std::move(shape), std::move(data));
    seen[idx] = true;
  }
  for (std::size_t i = 0; i < kParamTensorCount; ++i) {
    require(seen[i], ErrorCode::kTruncated,
            "checkpoint is missing tensor '" + std::string(names[i]) + "'");
  }
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorCode::kIo, "read of '" + path + "' failed");
  return bytes;
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIo,
          "cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  require(static_cast<bool>(out), ErrorCode::kIo,
          "write of '" + path + "' failed");
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  write_file(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::string& path) {
  return parse_checkpoint(read_file(path));
}

Session::Session(std::shared_ptr<const Checkpoint> checkpoint,
                 MemoryVector memory, std::uint64_t append_count)
    : checkpoint_(std::move(checkpoint)),
      memory_(std::move(memory)),
      append_count_(append_count) {
  require(checkpoint_ != nullptr, ErrorCode::kInvalidArgument,
          "session needs a checkpoint");
  checkpoint_->config.validate();
  checkpoint_->params.check_shapes(checkpoint_->config);
  require(memory_.dim() == checkpoint_->config.memory_dim,
          ErrorCode::kShapeMismatch,
          "memory has dimension " + std::to_string(memory_.dim()) +
              ", checkpoint expects " +
              std::to_string(checkpoint_->config.memory_dim));
}

Session Session::open(std::shared_ptr<const Checkpoint> checkpoint, Rng& rng) {
  require(checkpoint != nullptr, ErrorCode::kInvalidArgument,
          "session needs a checkpoint");
  MemoryVector m0 = sample_m0(checkpoint->config.memory_dim, rng);
  return Session(std::move(checkpoint), std::move(m0), 0);
}

void Session::append(const Tensor& key, int value) {
  const ModelConfig& config = checkpoint_->config;
  require(value >= 0 && static_cast<std::size_t>(value) < config.num_classes,
          ErrorCode::kInvalidArgument,
          "value " + std::to_string(value) + " outside [0, " +
              std::to_string(config.num_classes) + ")");
  memory_ = memorize_step(checkpoint_->params, config, memory_, key,
                          Tensor::vector({static_cast<float>(value)}));
  ++append_count_;
}

LookupResult Session::lookup(const Tensor& key) const {
  const Tensor logits =
      recall_logits(checkpoint_->params, checkpoint_->config, memory_, key);
  return {argmax(logits.data()), softmax(logits)};
}

std::string serialize_memory(const Session& session) {
  Writer w;
  w.bytes(kMemoryMagic);
  w.u32(static_cast<std::uint32_t>(session.memory().dim()));
  w.u64(session.append_count());
  w.f32s(session.memory().values.data());
  return w.take();
}

Session parse_memory(std::string_view bytes,
                     std::shared_ptr<const Checkpoint> checkpoint) {
  require(checkpoint != nullptr, ErrorCode::kInvalidArgument,
          "memory needs a checkpoint");
  Reader r(bytes);
  require(r.remaining() >= 4 && bytes.substr(0, 4) == kMemoryMagic,
          ErrorCode::kBadMagic, "not a memory file (bad magic)");
  r.bytes(4, "magic");
  const std::uint32_t dim = r.u32("dimension");
  const std::uint64_t count = r.u64("append count");
  require(dim == checkpoint->config.memory_dim, ErrorCode::kShapeMismatch,
          "memory has dimension " + std::to_string(dim) + ", checkpoint expects " +
              std::to_string(checkpoint->config.memory_dim));
  std::vector<float> values = r.f32s(dim, "memory data");
  require(r.done(), ErrorCode::kTruncated, "trailing bytes after memory data");
  check_finite(values, "memory file");
  return Session(std::move(checkpoint), {Tensor({dim}, std::move(values))}, count);
}

void save_memory(const std::string& path, const Session& session) {
  write_file(path, serialize_memory(session));
}

Session load_memory(const std::string& path,
                    std::shared_ptr<const Checkpoint> checkpoint) {
  return parse_memory(read_file(path), std::move(checkpoint));
}

}  // namespace appendmem
