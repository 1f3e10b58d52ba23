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

// AVX2 variants of the whole-bitmap kernels. This TU is compiled with
// -mavx2 and only ever entered after a cpuid check in the dispatcher, so the
// rest of the binary stays runnable on baseline x86-64.

#include <immintrin.h>

#include <bit>
#include <cstdint>

#include "raretrig/bitmap_kernels.hpp"

namespace raretrig::kernels {
namespace {

void or_merge_avx2(std::uint8_t* dst, const std::uint8_t* src,
                   std::size_t n) {
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    __m256i d = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
    __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i),
                        _mm256_or_si256(d, s));
  }
  for (; i < n; ++i) dst[i] |= src[i];
}

NoveltyCounts or_merge_novelty_avx2(std::uint8_t* dst, const std::uint8_t* src,
                                    std::size_t n) {
  NoveltyCounts c;
  const __m256i zero = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    __m256i d = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
    __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
    __m256i fresh = _mm256_andnot_si256(d, s);
    if (_mm256_testz_si256(fresh, fresh)) {
      // Nothing new in this stripe; still need the OR only if s adds bits,
      // which it doesn't here (fresh == 0 means s is a subset of d).
      continue;
    }
    __m256i d_zero = _mm256_cmpeq_epi8(d, zero);       // 0xFF where d == 0
    __m256i s_zero = _mm256_cmpeq_epi8(s, zero);       // 0xFF where s == 0
    __m256i newcell = _mm256_andnot_si256(s_zero, d_zero);
    c.new_cells += std::popcount(
        static_cast<std::uint32_t>(_mm256_movemask_epi8(newcell)));
    // Bucket-bit novelty only counts in cells that already had something.
    __m256i grown = _mm256_andnot_si256(d_zero, fresh);
    alignas(32) std::uint64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), grown);
    c.new_buckets += std::popcount(lanes[0]) + std::popcount(lanes[1]) +
                     std::popcount(lanes[2]) + std::popcount(lanes[3]);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i),
                        _mm256_or_si256(d, s));
  }
  for (; i < n; ++i) {
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

std::uint64_t count_nonzero_avx2(const std::uint8_t* p, std::size_t n) {
  const __m256i zero = _mm256_setzero_si256();
  std::uint64_t c = 0;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p + i));
    std::uint32_t zmask =
        static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(v, zero)));
    c += 32 - std::popcount(zmask);
  }
  for (; i < n; ++i) c += p[i] != 0;
  return c;
}

const KernelSet kAvx2Kernels = {
    or_merge_avx2,
    or_merge_novelty_avx2,
    count_nonzero_avx2,
    "avx2",
};

}  // namespace

namespace detail {
const KernelSet* avx2_set() { return &kAvx2Kernels; }
}  // namespace detail

}  // namespace raretrig::kernels
