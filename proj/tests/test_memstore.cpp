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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "appendmem/episodes.hpp"
#include "appendmem/error.hpp"
#include "appendmem/memstore.hpp"

using namespace appendmem;

namespace {

std::shared_ptr<const Checkpoint> make_checkpoint(std::uint64_t seed = 1,
                                                  std::size_t hidden = 32) {
  auto c = std::make_shared<Checkpoint>();
  c->config = ModelConfig::for_task(Task::kKv, hidden);
  c->task = Task::kKv;
  c->trained_n = 8;
  c->seed = seed;
  c->epochs_run = 123;
  Rng rng(seed);
  c->params = ModelParams::init(c->config, rng);
  return c;
}

// FNV-1a over the raw bytes of every parameter tensor.
std::uint64_t param_hash(const ModelParams& params) {
  std::uint64_t h = 1469598103934665603ull;
  for (const Tensor* t : params.tensors()) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(t->raw());
    for (std::size_t i = 0; i < t->size() * sizeof(float); ++i) {
      h = (h ^ bytes[i]) * 1099511628211ull;
    }
  }
  return h;
}

Tensor random_key(Rng& rng, std::size_t dim = 16) {
  Tensor k({dim});
  for (float& v : k.data()) v = rng.uniform(0.0f, 9.0f);
  return k;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("appendmem_store_" + name))
      .string();
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

bool same_bits(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() &&
         std::memcmp(a.raw(), b.raw(), a.size() * sizeof(float)) == 0;
}

}  // namespace

TEST_CASE("checkpoint round trip is byte identical") {
  const auto ckpt = make_checkpoint();
  const std::string bytes = serialize_checkpoint(*ckpt);
  CHECK(bytes.substr(0, 4) == "AMEM");
  const Checkpoint back = parse_checkpoint(bytes);
  CHECK(back == *ckpt);
  CHECK(serialize_checkpoint(back) == bytes);

  const std::string path = temp_path("ckpt.bin");
  save_checkpoint(path, *ckpt);
  CHECK(read_file(path) == bytes);
  CHECK(load_checkpoint(path) == *ckpt);
  std::filesystem::remove(path);

  const auto sort = std::make_shared<Checkpoint>(*ckpt);
  auto& s = const_cast<Checkpoint&>(*sort);
  s.task = Task::kSort;
  s.config = ModelConfig::for_task(Task::kSort, 8);
  Rng rng(2);
  s.params = ModelParams::init(s.config, rng);
  CHECK(parse_checkpoint(serialize_checkpoint(s)) == s);
}

TEST_CASE("loaded checkpoint recalls like the original") {
  const auto ckpt = make_checkpoint(3);
  const Checkpoint back = parse_checkpoint(serialize_checkpoint(*ckpt));
  Rng rng(4);
  const MemoryVector m = sample_m0(ckpt->config.memory_dim, rng);
  for (int i = 0; i < 50; ++i) {
    const Tensor q = random_key(rng);
    CHECK(same_bits(recall_logits(ckpt->params, ckpt->config, m, q),
                    recall_logits(back.params, back.config, m, q)));
  }
}

TEST_CASE("corrupt checkpoints fail with distinct errors") {
  const std::string bytes = serialize_checkpoint(*make_checkpoint());
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK(code_of([&] { parse_checkpoint(bad); }) == ErrorCode::kBadMagic);
  bad = bytes;
  bad[4] = 2;
  CHECK(code_of([&] { parse_checkpoint(bad); }) ==
        ErrorCode::kUnsupportedVersion);
  CHECK(code_of([&] { load_checkpoint(temp_path("missing.bin")); }) ==
        ErrorCode::kIo);
  const ErrorCode trailing = code_of([&] { parse_checkpoint(bytes + "x"); });
  CHECK((trailing == ErrorCode::kTruncated ||
         trailing == ErrorCode::kShapeMismatch));
  // Every truncation fails cleanly.
  for (std::size_t len = 0; len < bytes.size(); len += 1 + len / 64) {
    const ErrorCode code =
        code_of([&] { parse_checkpoint(std::string_view(bytes).substr(0, len)); });
    CHECK((code == ErrorCode::kTruncated || code == ErrorCode::kShapeMismatch ||
           code == ErrorCode::kBadMagic));
  }
}

TEST_CASE("open session") {
  const auto ckpt = make_checkpoint();
  Rng a(9), b(9);
  const Session s1 = Session::open(ckpt, a);
  const Session s2 = Session::open(ckpt, b);
  CHECK(s1.memory() == s2.memory());
  CHECK(s1.memory().dim() == ckpt->config.memory_dim);
  CHECK(s1.append_count() == 0);
  CHECK(ModelConfig::for_task(Task::kKv, 256).memory_dim == 256);
}

TEST_CASE("appends never touch parameters") {
  const auto ckpt = make_checkpoint(5);
  const std::uint64_t before = param_hash(ckpt->params);
  Rng rng(6);
  Session s = Session::open(ckpt, rng);
  for (int i = 0; i < 300; ++i) {
    s.append(random_key(rng), static_cast<int>(rng.uniform_index(10)));
    REQUIRE(s.append_count() == static_cast<std::uint64_t>(i + 1));
    REQUIRE(s.memory().dim() == ckpt->config.memory_dim);
    REQUIRE(param_hash(ckpt->params) == before);
    s.lookup(random_key(rng));
    REQUIRE(param_hash(ckpt->params) == before);
  }
  save_memory(temp_path("frozen.amv"), s);
  load_memory(temp_path("frozen.amv"), ckpt);
  CHECK(param_hash(ckpt->params) == before);
  std::filesystem::remove(temp_path("frozen.amv"));
}

TEST_CASE("session evolution is a fold of memorize steps") {
  const auto ckpt = make_checkpoint(7);
  Rng rng(8);
  Session s = Session::open(ckpt, rng);
  const MemoryVector m0 = s.memory();
  const Episode ep = gen_kv_episode(12, 16, rng);
  for (std::size_t i = 0; i < ep.size(); ++i) {
    const auto k = ep.key(i);
    s.append(Tensor({16}, std::vector<float>(k.begin(), k.end())), ep.values[i]);
  }
  CHECK(s.memory() == memorize_all(ckpt->params, ckpt->config, ep, m0));
}

TEST_CASE("lookup is idempotent and returns a distribution") {
  const auto ckpt = make_checkpoint();
  Rng rng(10);
  Session s = Session::open(ckpt, rng);
  s.append(random_key(rng), 4);
  const Tensor key = random_key(rng);
  const MemoryVector before = s.memory();
  const LookupResult a = s.lookup(key);
  const LookupResult b = s.lookup(key);
  CHECK(a.value == b.value);
  CHECK(same_bits(a.probabilities, b.probabilities));
  CHECK(s.memory() == before);
  double sum = 0;
  for (float p : a.probabilities.data()) sum += p;
  CHECK(std::abs(sum - 1.0) <= 1e-6);
  CHECK(a.value == predict(ckpt->params, ckpt->config, s.memory(), key));
}

TEST_CASE("append and lookup reject bad inputs") {
  const auto ckpt = make_checkpoint();
  Rng rng(11);
  Session s = Session::open(ckpt, rng);
  CHECK(code_of([&] { s.append(random_key(rng, 15), 1); }) ==
        ErrorCode::kShapeMismatch);
  CHECK(code_of([&] { s.append(random_key(rng), 10); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { s.append(random_key(rng), -1); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { s.lookup(random_key(rng, 17)); }) ==
        ErrorCode::kShapeMismatch);
  CHECK(s.append_count() == 0);
}

TEST_CASE("memory round trip") {
  const auto ckpt = make_checkpoint();
  Rng rng(12);
  Session s = Session::open(ckpt, rng);
  for (int i = 0; i < 5; ++i) s.append(random_key(rng), i);
  const std::string bytes = serialize_memory(s);
  CHECK(bytes.substr(0, 4) == "AMV1");
  CHECK(bytes.size() == 4 + 4 + 8 + 4 * ckpt->config.memory_dim);
  const Session back = parse_memory(bytes, ckpt);
  CHECK(back.append_count() == 5);
  CHECK(back.memory() == s.memory());
  CHECK(serialize_memory(back) == bytes);

  const auto other = std::make_shared<Checkpoint>(*make_checkpoint(1, 16));
  CHECK(code_of([&] { parse_memory(bytes, other); }) ==
        ErrorCode::kShapeMismatch);
  std::string bad = bytes;
  bad[3] = '2';
  CHECK(code_of([&] { parse_memory(bad, ckpt); }) == ErrorCode::kBadMagic);
  for (std::size_t len = 0; len < bytes.size(); len += 7) {
    const ErrorCode code =
        code_of([&] { parse_memory(std::string_view(bytes).substr(0, len), ckpt); });
    CHECK((code == ErrorCode::kTruncated || code == ErrorCode::kShapeMismatch ||
           code == ErrorCode::kBadMagic));
  }
}

TEST_CASE("persistence is transparent under random interleavings") {
  const auto ckpt = make_checkpoint(13);
  const std::string path = temp_path("interleave.amv");
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    Rng ops(100 + trial);
    Rng init_a(trial), init_b(trial);
    Session live = Session::open(ckpt, init_a);
    Session persisted = Session::open(ckpt, init_b);
    const std::size_t count = 1 + ops.uniform_index(32);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t op = ops.uniform_index(4);
      if (op == 0) {
        const Tensor k = random_key(ops);
        const int v = static_cast<int>(ops.uniform_index(10));
        live.append(k, v);
        persisted.append(k, v);
      } else if (op == 1) {
        const Tensor k = random_key(ops);
        const LookupResult a = live.lookup(k);
        const LookupResult b = persisted.lookup(k);
        REQUIRE(a.value == b.value);
        REQUIRE(same_bits(a.probabilities, b.probabilities));
      } else if (op == 2) {
        save_memory(path, persisted);
      } else {
        save_memory(path, persisted);
        persisted = load_memory(path, ckpt);
      }
      REQUIRE(live.memory() == persisted.memory());
      REQUIRE(live.append_count() == persisted.append_count());
    }
    std::filesystem::remove(path);
  }
}

TEST_CASE("append after reload equals append without the detour") {
  const auto ckpt = make_checkpoint(14);
  const std::string path = temp_path("resume.amv");
  Rng rng(15);
  Session s = Session::open(ckpt, rng);
  for (int i = 0; i < 4; ++i) s.append(random_key(rng), i);
  save_memory(path, s);
  Session r = load_memory(path, ckpt);
  for (int i = 0; i < 6; ++i) {
    const Tensor k = random_key(rng);
    s.append(k, i);
    r.append(k, i);
  }
  CHECK(r.memory() == s.memory());
  CHECK(r.append_count() == 10);
  std::filesystem::remove(path);
}
