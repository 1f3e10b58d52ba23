// Copyright 2026 The raretrig Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RARETRIG_RNG_HPP_
#define RARETRIG_RNG_HPP_

#include <cstdint>
#include <random>

namespace raretrig {

// Deterministic RNG used everywhere the engine makes a random choice.
// mt19937_64 output is pinned by the C++ standard, and the bounded sampler
// below is a plain modulo, so a (seed, call sequence) pair reproduces the
// same bytes on every platform/stdlib. std::uniform_int_distribution is
// deliberately avoided: its mapping is implementation-defined and would make
// committed corpus artifacts non-reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform-ish draw in [0, n). Modulo bias is < n/2^64 — irrelevant for
  // fuzzing choices, and portability matters more here than perfection.
  std::uint64_t below(std::uint64_t n) { return n <= 1 ? 0 : eng_() % n; }

  std::uint8_t next_byte() { return static_cast<std::uint8_t>(eng_() & 0xff); }

  // Derives an independent stream for a subsystem from the *construction*
  // seed, not the evolving state, so sibling streams don't depend on how many
  // draws happened in between. splitmix64 finalizer keeps small tags apart.
  Rng split(std::uint64_t tag) const { return Rng(derive_seed(seed_, tag)); }

  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace raretrig

#endif  // RARETRIG_RNG_HPP_
