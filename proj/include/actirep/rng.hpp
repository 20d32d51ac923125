/*
 * Copyright 2026 The Actirep Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ACTIREP_RNG_HPP_
#define ACTIREP_RNG_HPP_

#include <cstdint>
#include <string_view>
#include <vector>

namespace actirep {

// xoshiro256** seeded through splitmix64. All sampling helpers are built on
// top of the raw 64-bit stream, so sequences are reproducible across
// platforms and standard-library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform01();

  // Uniform in [lo, hi).
  double uniform(double lo, double hi);

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  // Standard normal via Box-Muller (pairs cached).
  double normal();
  double normal(double mean, double stddev);

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_[4];
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Root-seed splitting scheme: every stage derives its own seed as
//   derive_seed(root, tag [, index])
// where `tag` names the stage (e.g. "vae", "eval.repeat"). The derivation
// hashes the tag with FNV-1a and mixes root, tag hash and index through
// splitmix64, so derived streams are independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                          std::uint64_t index = 0);

}  // namespace actirep

#endif  // ACTIREP_RNG_HPP_
