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

#include "raretrig/bitmap_kernels.hpp"

#include <bit>

namespace raretrig::kernels {

namespace {

void or_merge_scalar(std::uint8_t* dst, const std::uint8_t* src,
                     std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] |= src[i];
}

NoveltyCounts or_merge_novelty_scalar(std::uint8_t* dst,
                                      const std::uint8_t* src,
                                      std::size_t n) {
  NoveltyCounts c;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t d = dst[i];
    const std::uint8_t s = src[i];
    const std::uint8_t fresh = static_cast<std::uint8_t>(s & ~d);
    if (fresh) {
      if (d == 0)
        ++c.new_cells;
      else
        c.new_buckets += std::popcount(fresh);
    }
    dst[i] = d | s;
  }
  return c;
}

std::uint64_t count_nonzero_scalar(const std::uint8_t* p, std::size_t n) {
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += p[i] != 0;
  return c;
}

}  // namespace

const KernelSet kScalarKernels = {
    or_merge_scalar,
    or_merge_novelty_scalar,
    count_nonzero_scalar,
    "scalar",
};

#ifdef RARETRIG_HAVE_AVX2_TU
namespace detail {
const KernelSet* avx2_set();  // defined in the -mavx2 TU
}
#endif

const KernelSet* avx2_kernels_if_supported() {
#ifdef RARETRIG_HAVE_AVX2_TU
  if (__builtin_cpu_supports("avx2")) return detail::avx2_set();
#endif
  return nullptr;
}

const KernelSet& active_kernels() {
  static const KernelSet* selected = [] {
    if (const KernelSet* avx2 = avx2_kernels_if_supported()) return avx2;
    return &kScalarKernels;
  }();
  return *selected;
}

}  // namespace raretrig::kernels
