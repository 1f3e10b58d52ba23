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

#ifndef RARETRIG_BITMAP_KERNELS_HPP_
#define RARETRIG_BITMAP_KERNELS_HPP_

#include <cstddef>
#include <cstdint>

namespace raretrig::kernels {

inline constexpr std::size_t kBitmapCells = 65536;

// Whole-bitmap primitives. These are the only data-parallel hot loops in the
// engine, so they come in a scalar reference flavor and an AVX2 flavor picked
// once at startup by cpuid. Per-execution coverage absorption is sparse and
// does not go through here.
struct NoveltyCounts {
  std::uint64_t new_cells = 0;    // cells 0 in dst, nonzero in src
  std::uint64_t new_buckets = 0;  // bucket bits set in src but not dst
};

using OrMergeFn = void (*)(std::uint8_t* dst, const std::uint8_t* src,
                           std::size_t n);
using OrMergeNoveltyFn = NoveltyCounts (*)(std::uint8_t* dst,
                                           const std::uint8_t* src,
                                           std::size_t n);
using CountNonzeroFn = std::uint64_t (*)(const std::uint8_t* p,
                                         std::size_t n);

struct KernelSet {
  OrMergeFn or_merge;
  OrMergeNoveltyFn or_merge_novelty;
  CountNonzeroFn count_nonzero;
  const char* name;  // "scalar" or "avx2"
};

// Reference implementations (always available, used as the test oracle).
extern const KernelSet kScalarKernels;

// Returns AVX2 kernels when both compiled in and supported by this CPU,
// otherwise nullptr.
const KernelSet* avx2_kernels_if_supported();

// The set selected for this process (scalar unless AVX2 is available).
const KernelSet& active_kernels();

}  // namespace raretrig::kernels

#endif  // RARETRIG_BITMAP_KERNELS_HPP_
