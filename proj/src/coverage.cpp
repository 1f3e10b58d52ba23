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

#include "raretrig/coverage.hpp"

#include <algorithm>
#include <vector>

#include "json.hpp"
#include "raretrig/bitmap_kernels.hpp"

namespace raretrig {

std::uint8_t bucket_bit(std::uint64_t hits) {
  if (hits == 0) return 0;
  if (hits == 1) return 1u << 0;
  if (hits == 2) return 1u << 1;
  if (hits == 3) return 1u << 2;
  if (hits <= 7) return 1u << 3;
  if (hits <= 15) return 1u << 4;
  if (hits <= 31) return 1u << 5;
  if (hits <= 127) return 1u << 6;
  return 1u << 7;
}

NoveltyResult absorb(CoverageBitmap& bitmap, const Trace& trace,
                     const InstrumentationPlan& plan) {
  NoveltyResult r;
  if (trace.edge_sequence.empty()) return r;

  // Scratch reused across calls; absorb sits on the fuzzer's per-execution
  // path, where touching all 64K cells would dominate everything else.
  thread_local std::vector<std::uint32_t> idxs;
  idxs.clear();
  idxs.reserve(trace.edge_sequence.size());
  for (const auto& [prev, cur] : trace.edge_sequence) {
    const std::uint16_t lp =
        prev == kEntryEdgeSource ? 0 : plan.label_of(prev);
    const std::uint16_t lc = plan.label_of(cur);
    idxs.push_back(static_cast<std::uint32_t>((lp >> 1) ^ lc));
  }
  std::sort(idxs.begin(), idxs.end());

  std::uint8_t* cells = bitmap.cells();
  for (std::size_t i = 0; i < idxs.size();) {
    std::size_t j = i + 1;
    while (j < idxs.size() && idxs[j] == idxs[i]) ++j;
    const std::uint8_t bit = bucket_bit(j - i);
    std::uint8_t& cell = cells[idxs[i]];
    if (const std::uint8_t fresh = static_cast<std::uint8_t>(bit & ~cell)) {
      if (cell == 0)
        ++r.new_cells;
      else
        ++r.new_buckets;
    }
    cell |= bit;
    ++r.trace_cells;
    i = j;
  }
  return r;
}

void merge(CoverageBitmap& dst, const CoverageBitmap& src) {
  kernels::active_kernels().or_merge(dst.cells(), src.cells(), dst.size());
}

std::uint64_t count_set_cells(const CoverageBitmap& bitmap) {
  return kernels::active_kernels().count_nonzero(bitmap.cells(),
                                                 bitmap.size());
}

namespace {

// Branch arms the design admits as coverable: two per branch block, minus
// the author-declared dead arms.
std::pair<std::uint64_t, std::set<BranchEdge>> coverable_arms(const Dut& dut) {
  std::set<BranchEdge> arms;
  for (const auto& [id, blk] : dut.blocks) {
    if (blk.term.kind != Terminator::Kind::kBranch) continue;
    arms.insert({id, Arm::kThen});
    arms.insert({id, Arm::kElse});
  }
  for (const auto& e : dut.declared_unreachable) arms.erase(e);
  return {arms.size(), std::move(arms)};
}

}  // namespace

CoverageReport evaluate(const Dut& dut, const InstrumentationPlan& plan,
                        const std::vector<TestCase>& testcases,
                        const std::set<BranchEdge>& rare) {
  CoverageReport rep;
  rep.rare_total = static_cast<std::uint32_t>(rare.size());

  auto [denom, coverable] = coverable_arms(dut);

  // Nothing to look for means nothing to run: an empty rare set returns an
  // empty report without touching the interpreter.
  if (rare.empty()) return rep;

  std::set<BranchEdge> rare_left = rare;
  for (const TestCase& tc : testcases) {
    if (rare_left.empty()) break;  // everything found
    auto t = execute(dut, tc, plan);
    if (!t.ok()) {
      rep.skipped.push_back(tc.id);
      continue;
    }
    ++rep.executed;
    std::vector<BranchEdge> firsts;
    for (const auto& [site, taken] : t.value().branch_events) {
      BranchEdge e{site, taken ? Arm::kThen : Arm::kElse};
      rep.branch_edges_covered.insert(e);
      if (rare_left.erase(e)) firsts.push_back(e);
    }
    if (!firsts.empty()) rep.per_testcase.emplace(tc.id, std::move(firsts));
  }
  rep.rare_covered_count =
      static_cast<std::uint32_t>(rare.size() - rare_left.size());

  std::uint64_t covered_coverable = 0;
  for (const auto& e : rep.branch_edges_covered)
    if (coverable.count(e)) ++covered_coverable;
  rep.branch_cov_percent =
      denom == 0 ? 100.0
                 : 100.0 * static_cast<double>(covered_coverable) /
                       static_cast<double>(denom);
  return rep;
}

std::string coverage_report_to_json(const CoverageReport& rep) {
  nlohmann::json j;
  j["rare_covered_count"] = rep.rare_covered_count;
  j["rare_total"] = rep.rare_total;
  j["branch_edges_covered"] = nlohmann::json::array();
  for (const auto& e : rep.branch_edges_covered)
    j["branch_edges_covered"].push_back(to_string(e));
  j["branch_cov_percent"] = rep.branch_cov_percent;
  j["per_testcase"] = nlohmann::json::object();
  for (const auto& [id, edges] : rep.per_testcase) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : edges) arr.push_back(to_string(e));
    j["per_testcase"][std::to_string(id)] = std::move(arr);
  }
  j["skipped"] = rep.skipped;
  j["executed"] = rep.executed;
  return j.dump(2);
}

}  // namespace raretrig
