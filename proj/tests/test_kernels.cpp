#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "raretrig/bitmap_kernels.hpp"
#include "raretrig/rng.hpp"

using namespace raretrig;
using namespace raretrig::kernels;

namespace {

std::vector<std::uint8_t> random_buf(std::size_t n, Rng& rng,
                                     double zero_bias) {
  std::vector<std::uint8_t> v(n);
  for (auto& b : v)
    b = rng.below(1000) < static_cast<std::uint64_t>(zero_bias * 1000)
            ? 0
            : rng.next_byte();
  return v;
}

NoveltyCounts brute_novelty(const std::vector<std::uint8_t>& dst,
                            const std::vector<std::uint8_t>& src) {
  NoveltyCounts c;
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const std::uint8_t fresh = static_cast<std::uint8_t>(src[i] & ~dst[i]);
    if (!fresh) continue;
    if (dst[i] == 0) {
      ++c.new_cells;
    } else {
      // Fresh bucket bits in an already-seen cell count individually.
      for (int bit = 0; bit < 8; ++bit)
        if (fresh & (1u << bit)) ++c.new_buckets;
    }
  }
  return c;
}

}  // namespace

TEST_CASE("scalar kernels match brute force") {
  Rng rng(1);
  for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{31},
                        std::size_t{32}, std::size_t{33}, std::size_t{1000},
                        kBitmapCells}) {
    auto dst = random_buf(n, rng, 0.7);
    auto src = random_buf(n, rng, 0.7);

    std::uint64_t nz = 0;
    for (auto b : src)
      if (b) ++nz;
    CHECK(kScalarKernels.count_nonzero(src.data(), n) == nz);

    NoveltyCounts want = brute_novelty(dst, src);
    auto merged = dst;
    NoveltyCounts got =
        kScalarKernels.or_merge_novelty(merged.data(), src.data(), n);
    CHECK(got.new_cells == want.new_cells);
    CHECK(got.new_buckets == want.new_buckets);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(merged[i] == (dst[i] | src[i]));

    auto merged2 = dst;
    kScalarKernels.or_merge(merged2.data(), src.data(), n);
    CHECK(merged2 == merged);
  }
}

TEST_CASE("vector kernels agree with scalar on random buffers") {
  const KernelSet* simd = avx2_kernels_if_supported();
  if (simd == nullptr) {
    MESSAGE("no AVX2 on this host; scalar-only configuration");
    return;
  }
  CHECK(std::string(simd->name) == "avx2");

  Rng rng(2);
  // Tail handling matters: exercise sizes around the 32-byte lane width.
  for (std::size_t n : {std::size_t{1}, std::size_t{5}, std::size_t{31},
                        std::size_t{32}, std::size_t{33}, std::size_t{63},
                        std::size_t{64}, std::size_t{65}, std::size_t{4097},
                        kBitmapCells}) {
    for (int round = 0; round < 8; ++round) {
      auto dst = random_buf(n, rng, round % 2 ? 0.95 : 0.3);
      auto src = random_buf(n, rng, round % 2 ? 0.3 : 0.95);

      auto scalar_dst = dst;
      auto simd_dst = dst;
      NoveltyCounts a = kScalarKernels.or_merge_novelty(scalar_dst.data(),
                                                        src.data(), n);
      NoveltyCounts b =
          simd->or_merge_novelty(simd_dst.data(), src.data(), n);
      CHECK(a.new_cells == b.new_cells);
      CHECK(a.new_buckets == b.new_buckets);
      CHECK(scalar_dst == simd_dst);

      CHECK(simd->count_nonzero(src.data(), n) ==
            kScalarKernels.count_nonzero(src.data(), n));

      auto plain = dst;
      simd->or_merge(plain.data(), src.data(), n);
      CHECK(plain == scalar_dst);
    }
  }
}

TEST_CASE("active kernel set is one of the known implementations") {
  const KernelSet& k = active_kernels();
  const std::string name = k.name;
  CHECK((name == "scalar" || name == "avx2"));
  // Whichever is active must behave like scalar.
  Rng rng(3);
  auto dst = random_buf(kBitmapCells, rng, 0.8);
  auto src = random_buf(kBitmapCells, rng, 0.8);
  auto via_active = dst;
  auto via_scalar = dst;
  k.or_merge(via_active.data(), src.data(), kBitmapCells);
  kScalarKernels.or_merge(via_scalar.data(), src.data(), kBitmapCells);
  CHECK(via_active == via_scalar);
  CHECK(k.count_nonzero(src.data(), kBitmapCells) ==
        kScalarKernels.count_nonzero(src.data(), kBitmapCells));
}
