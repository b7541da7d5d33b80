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

#include <appendmem/appendmem.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("appendmem_capi_" + name))
      .string();
}

am_train_config tiny_config(am_task task = AM_TASK_KV) {
  am_train_config c;
  am_train_config_defaults(task, AM_MODE_RANDOMIZED, &c);
  c.hidden_dim = 16;
  c.batch_size = 16;
  c.max_epochs = 3;
  c.seed = 5;
  return c;
}

am_checkpoint* tiny_model(am_task task = AM_TASK_KV) {
  const am_train_config c = tiny_config(task);
  am_checkpoint* ckpt = nullptr;
  REQUIRE(am_train(&c, nullptr, nullptr, nullptr, &ckpt, nullptr) == AM_OK);
  return ckpt;
}

void count_rows(const am_epoch_row*, void* user) {
  ++*static_cast<int*>(user);
}

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(std::string(am_version()).size() > 0);
  CHECK(std::string(am_status_string(AM_OK)) == "ok");
  CHECK(std::string(am_status_string(AM_ERR_BAD_MAGIC)) !=
        std::string(am_status_string(AM_ERR_TRUNCATED)));
}

TEST_CASE("null arguments are rejected, not crashed on") {
  CHECK(am_train(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr) ==
        AM_ERR_INVALID_ARGUMENT);
  CHECK(std::string(am_last_error()).size() > 0);
  am_checkpoint* ckpt = nullptr;
  CHECK(am_checkpoint_load(nullptr, &ckpt) == AM_ERR_INVALID_ARGUMENT);
  CHECK(am_session_open(nullptr, 0, nullptr) == AM_ERR_INVALID_ARGUMENT);
  am_checkpoint_free(nullptr);
  am_session_free(nullptr);
}

TEST_CASE("config validation") {
  am_train_config c = tiny_config();
  CHECK(am_train_config_validate(&c) == AM_OK);
  c.mode = AM_MODE_STANDARD;
  c.stop_metric = AM_STOP_VAL_ACC;
  CHECK(am_train_config_validate(&c) == AM_ERR_INVALID_ARGUMENT);
  c = tiny_config(AM_TASK_SORT);
  c.n = 11;
  CHECK(am_train_config_validate(&c) == AM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("train, report and callback") {
  const am_train_config c = tiny_config();
  am_checkpoint* ckpt = nullptr;
  am_train_report report;
  int rows = 0;
  const std::string metrics = temp_path("metrics.csv");
  REQUIRE(am_train(&c, metrics.c_str(), count_rows, &rows, &ckpt, &report) ==
          AM_OK);
  CHECK(rows == 3);
  CHECK(report.epochs_run == 3);
  CHECK(report.stop_reason == AM_STOPPED_AT_MAX_EPOCHS);
  CHECK(std::filesystem::exists(metrics));
  am_model_info info;
  REQUIRE(am_checkpoint_info(ckpt, &info) == AM_OK);
  CHECK(info.task == AM_TASK_KV);
  CHECK(info.hidden_dim == 16);
  CHECK(info.key_dim == 16);
  CHECK(info.num_classes == 10);
  CHECK(info.trained_n == 2);
  CHECK(info.epochs_run == 3);
  am_checkpoint_free(ckpt);
  std::filesystem::remove(metrics);
}

TEST_CASE("checkpoint files round trip and report distinct errors") {
  am_checkpoint* ckpt = tiny_model();
  const std::string path = temp_path("model.ckpt");
  REQUIRE(am_checkpoint_save(ckpt, path.c_str()) == AM_OK);
  am_checkpoint* back = nullptr;
  REQUIRE(am_checkpoint_load(path.c_str(), &back) == AM_OK);
  const std::string again = temp_path("model2.ckpt");
  REQUIRE(am_checkpoint_save(back, again.c_str()) == AM_OK);
  CHECK(std::filesystem::file_size(path) == std::filesystem::file_size(again));

  am_checkpoint* none = nullptr;
  CHECK(am_checkpoint_load(temp_path("missing").c_str(), &none) == AM_ERR_IO);
  CHECK(none == nullptr);
  {
    std::FILE* f = std::fopen(again.c_str(), "wb");
    std::fputs("NOPE....", f);
    std::fclose(f);
  }
  CHECK(am_checkpoint_load(again.c_str(), &none) == AM_ERR_BAD_MAGIC);
  std::filesystem::resize_file(path, 20);
  CHECK(am_checkpoint_load(path.c_str(), &none) == AM_ERR_TRUNCATED);
  am_checkpoint_free(ckpt);
  am_checkpoint_free(back);
  std::filesystem::remove(path);
  std::filesystem::remove(again);
}

TEST_CASE("sessions append, look up and persist") {
  am_checkpoint* ckpt = tiny_model();
  am_session* s = nullptr;
  REQUIRE(am_session_open(ckpt, 9, &s) == AM_OK);
  std::vector<float> key(16, 1.5f);
  REQUIRE(am_session_append(s, key.data(), key.size(), 7) == AM_OK);
  CHECK(am_session_append(s, key.data(), 15, 7) == AM_ERR_SHAPE_MISMATCH);
  CHECK(am_session_append(s, key.data(), key.size(), 10) ==
        AM_ERR_INVALID_ARGUMENT);
  uint64_t count = 0;
  REQUIRE(am_session_append_count(s, &count) == AM_OK);
  CHECK(count == 1);

  int32_t value = -1;
  std::vector<float> probs(10);
  REQUIRE(am_session_lookup(s, key.data(), key.size(), &value, probs.data(),
                            probs.size()) == AM_OK);
  CHECK(value >= 0);
  CHECK(value < 10);
  double sum = 0;
  for (float p : probs) sum += p;
  CHECK(std::abs(sum - 1.0) <= 1e-6);
  CHECK(am_session_lookup(s, key.data(), key.size(), &value, probs.data(), 3) ==
        AM_ERR_SHAPE_MISMATCH);

  const std::string path = temp_path("memory.amv");
  REQUIRE(am_session_save(s, path.c_str()) == AM_OK);
  am_session* r = nullptr;
  REQUIRE(am_session_load(ckpt, path.c_str(), &r) == AM_OK);
  REQUIRE(am_session_append_count(r, &count) == AM_OK);
  CHECK(count == 1);
  std::vector<float> m1(16), m2(16);
  REQUIRE(am_session_memory(s, m1.data(), m1.size()) == AM_OK);
  REQUIRE(am_session_memory(r, m2.data(), m2.size()) == AM_OK);
  CHECK(m1 == m2);
  CHECK(am_session_memory(s, m1.data(), 4) == AM_ERR_SHAPE_MISMATCH);

  int32_t value2 = -1;
  std::vector<float> probs2(10);
  REQUIRE(am_session_lookup(r, key.data(), key.size(), &value2, probs2.data(),
                            probs2.size()) == AM_OK);
  CHECK(value2 == value);
  CHECK(probs2 == probs);

  am_session* same = nullptr;
  REQUIRE(am_session_open(ckpt, 9, &same) == AM_OK);
  REQUIRE(am_session_append(same, key.data(), key.size(), 7) == AM_OK);
  REQUIRE(am_session_memory(same, m2.data(), m2.size()) == AM_OK);
  CHECK(m1 == m2);

  am_session_free(s);
  am_session_free(r);
  am_session_free(same);
  am_checkpoint_free(ckpt);
  std::filesystem::remove(path);
}

TEST_CASE("eval checks the model task") {
  am_checkpoint* kv = tiny_model(AM_TASK_KV);
  am_checkpoint* sort = tiny_model(AM_TASK_SORT);
  am_eval_options opts;
  am_eval_options_defaults(AM_EXP_TEST, &opts);
  opts.trials = 64;
  double headline = -1;
  REQUIRE(am_eval(kv, &opts, &headline) == AM_OK);
  CHECK(headline >= 0.0);
  CHECK(headline <= 1.0);
  CHECK(am_eval(sort, &opts, &headline) == AM_ERR_TASK_MISMATCH);

  am_eval_options_defaults(AM_EXP_SORT_EXACT, &opts);
  opts.trials = 64;
  CHECK(am_eval(kv, &opts, &headline) == AM_ERR_TASK_MISMATCH);
  REQUIRE(am_eval(sort, &opts, &headline) == AM_OK);

  am_eval_options_defaults(AM_EXP_CAPACITY, &opts);
  opts.trials = 16;
  const uint32_t counts[] = {2, 4};
  opts.counts = counts;
  opts.counts_len = 2;
  const std::string out = temp_path("capacity.csv");
  opts.out_path = out.c_str();
  REQUIRE(am_eval(kv, &opts, &headline) == AM_OK);
  CHECK(std::filesystem::exists(out));
  std::filesystem::remove(out);

  double numbers[] = {1.25, 0.5};
  double sorted[2];
  int complete = 0;
  REQUIRE(am_sort(sort, numbers, 2, 1, sorted, &complete) == AM_OK);
  CHECK(am_sort(kv, numbers, 2, 1, sorted, &complete) == AM_ERR_TASK_MISMATCH);
  for (double v : sorted) {
    CHECK((v == 0.5 || v == 1.25));
  }
  if (complete) CHECK(sorted[0] != sorted[1]);
  am_checkpoint_free(kv);
  am_checkpoint_free(sort);
}

TEST_CASE("gradcheck and episode dump") {
  am_gradcheck_options g;
  am_gradcheck_defaults(&g);
  g.trials = 2;
  am_gradcheck_result res;
  REQUIRE(am_gradcheck(&g, &res) == AM_OK);
  CHECK(res.passed == 1);
  CHECK(res.coordinates > 0);
  g.trials = 0;
  CHECK(am_gradcheck(&g, &res) == AM_ERR_INVALID_ARGUMENT);

  size_t needed = 0;
  CHECK(am_dump_episode(AM_TASK_KV, 3, 4, 1, nullptr, 0, &needed) ==
        AM_ERR_INVALID_ARGUMENT);
  REQUIRE(needed > 0);
  std::string buf(needed, '\0');
  REQUIRE(am_dump_episode(AM_TASK_KV, 3, 4, 1, buf.data(), buf.size(),
                          &needed) == AM_OK);
  int lines = 0;
  for (char ch : buf) lines += ch == '\n';
  CHECK(lines == 3);
  CHECK(buf.find('\t') != std::string::npos);
}
