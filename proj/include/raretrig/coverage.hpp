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

#ifndef RARETRIG_COVERAGE_HPP_
#define RARETRIG_COVERAGE_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "raretrig/dut.hpp"
#include "raretrig/instrument.hpp"

namespace raretrig {

// Edge-hit bitmap in the classic greybox shape: 65,536 cells, one byte per
// cell, each byte a mask of hit-count buckets seen for that cell. The cell
// for a trace edge (prev, cur) is (label(prev) >> 1) ^ label(cur); the shift
// keeps A->B and B->A apart.
class CoverageBitmap {
 public:
  static constexpr std::size_t kSize = 65536;

  // Heap storage: bitmaps get copied around (workers, snapshots) and 64 KiB
  // per instance does not belong on the stack.
  CoverageBitmap() : cells_(kSize, 0) {}

  std::uint8_t* cells() { return cells_.data(); }
  const std::uint8_t* cells() const { return cells_.data(); }
  std::size_t size() const { return cells_.size(); }

  std::uint8_t operator[](std::size_t i) const { return cells_[i]; }
  void clear() { cells_.assign(kSize, 0); }

  bool operator==(const CoverageBitmap&) const = default;

 private:
  std::vector<std::uint8_t> cells_;
};

// Hit count -> bucket bit: 1,2,3,4-7,8-15,16-31,32-127,128+ -> bits 0..7.
std::uint8_t bucket_bit(std::uint64_t hits);

struct NoveltyResult {
  std::uint32_t new_cells = 0;    // cells that went 0 -> nonzero
  std::uint32_t new_buckets = 0;  // bucket bits newly set in pre-existing
                                  // nonzero cells
  std::uint32_t trace_cells = 0;  // distinct cells this trace touched
};

// Folds one trace into the bitmap and reports what was new. Walks only the
// trace's own edges (sparse), so cost is O(edge_sequence length), not O(64K).
// The trace must have been produced under `plan` (labels must match).
NoveltyResult absorb(CoverageBitmap& bitmap, const Trace& trace,
                     const InstrumentationPlan& plan);

// dst |= src cellwise, via the runtime-selected kernel.
void merge(CoverageBitmap& dst, const CoverageBitmap& src);

// Number of nonzero cells.
std::uint64_t count_set_cells(const CoverageBitmap& bitmap);

struct CoverageReport {
  std::uint32_t rare_covered_count = 0;
  std::uint32_t rare_total = 0;
  std::set<BranchEdge> branch_edges_covered;
  double branch_cov_percent = 0.0;  // over arms not declared unreachable
  // Test-case id -> rare arms that case covered first.
  std::map<std::uint64_t, std::vector<BranchEdge>> per_testcase;
  std::vector<std::uint64_t> skipped;  // ids that failed to execute
  std::uint32_t executed = 0;          // cases actually run (early exit stops)
};

// Replays the given cases and scores them against the rare-target set,
// stopping early once every rare arm has been seen. Frame errors skip the
// case (recorded), they don't abort the evaluation.
CoverageReport evaluate(const Dut& dut, const InstrumentationPlan& plan,
                        const std::vector<TestCase>& testcases,
                        const std::set<BranchEdge>& rare);

std::string coverage_report_to_json(const CoverageReport& report);

}  // namespace raretrig

#endif  // RARETRIG_COVERAGE_HPP_
