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

#include <cmath>
#include <cstdint>
#include <random>

namespace appendmem {

// SplitMix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b = 0,
                                    std::uint64_t c = 0) noexcept {
  return mix64(mix64(mix64(mix64(seed) ^ a) ^ b) ^ c);
}

// Named streams so that, e.g., validation data never shares draws with
// training data or initialization.
enum class Stream : std::uint64_t {
  kInit = 1,
  kTrain = 2,
  kValidation = 3,
  kTest = 4,
  kSession = 5,
  kSort = 6,
};

// Seeded generator over std::mt19937_64 (a standardized algorithm). The
// distributions are written out here rather than taken from <random>, whose
// distribution algorithms are implementation-defined; this keeps draws
// bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  static Rng derive(std::uint64_t seed, Stream stream, std::uint64_t a = 0,
                    std::uint64_t b = 0) {
    return Rng(derive_seed(seed, static_cast<std::uint64_t>(stream), a, b));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 24 random mantissa bits.
  float uniform01f() {
    return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f;
  }

  // Uniform on [lo, hi). The result is clamped below hi to absorb rounding.
  float uniform(float lo, float hi) {
    const float x = lo + (hi - lo) * uniform01f();
    return x < hi ? x : std::nextafter(hi, lo);
  }

  // Uniform on {0, ..., n-1}; unbiased rejection sampling.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace appendmem
