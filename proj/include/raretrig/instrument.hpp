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

#ifndef RARETRIG_INSTRUMENT_HPP_
#define RARETRIG_INSTRUMENT_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "raretrig/dut.hpp"

namespace raretrig {

// Immediate-dominator tree over the CFG reachable from the entry block.
// Cycle boundaries are not CFG edges: CycleEnd and Halt have no successors
// (the next cycle restarts at the entry by construction, not by an edge).
struct DomTree {
  // idom[b] for every reachable block except the entry, which has none.
  std::map<BlockId, BlockId> idom;
  std::set<BlockId> reachable;

  bool dominates(BlockId a, BlockId b) const;  // reflexive
};

DomTree compute_dominators(const Dut& dut);

// CFG successors/predecessors as used for dominators and block selection.
std::vector<BlockId> cfg_successors(const BasicBlock& b);
std::map<BlockId, std::vector<BlockId>> cfg_predecessors(const Dut& dut);

struct InstrumentationPlan {
  enum class Mode : std::uint8_t { kFull, kSelective };

  Mode mode = Mode::kFull;
  std::set<BlockId> instrumented;
  // 16-bit pseudo-random label per instrumented block; stable for a given
  // (dut, label_seed) regardless of mode or target set.
  std::map<BlockId, std::uint16_t> labels;
  std::set<BranchEdge> targets;

  // Flat lookup tables for the interpreter/coverage hot paths, built by
  // select_blocks (indexed by block id; valid because parse bounds ids).
  std::vector<std::uint8_t> instrumented_flat;
  std::vector<std::uint16_t> labels_flat;

  bool is_instrumented(BlockId b) const {
    return b < instrumented_flat.size() && instrumented_flat[b] != 0;
  }
  std::uint16_t label_of(BlockId b) const {
    return b < labels_flat.size() ? labels_flat[b] : 0;
  }
};

// Chooses the blocks that report coverage. Full mode instruments every
// reachable block. Selective mode keeps (a) destinations of target arms,
// (b) blocks with >= 2 CFG predecessors, (c) successors of Branch blocks,
// plus the entry block; a block whose immediate dominator has exactly one
// successor is redundant (its visit is implied by the dominator's) and is
// omitted unless one of the rules above keeps it.
InstrumentationPlan select_blocks(const Dut& dut, const DomTree& dom,
                                  const std::set<BranchEdge>& targets,
                                  InstrumentationPlan::Mode mode,
                                  std::uint64_t label_seed);

// Rebuilds the full visited-block set from a selective trace: a block absent
// from the plan was visited iff its immediate dominator closure meets the
// observed set. Exact for plans produced by select_blocks.
std::set<BlockId> reconstruct_visited(const Dut& dut, const DomTree& dom,
                                      const InstrumentationPlan& plan,
                                      const Trace& trace);

// Plan serialization for --emit-plan and tooling.
std::string plan_to_json(const InstrumentationPlan& plan);

}  // namespace raretrig

#endif  // RARETRIG_INSTRUMENT_HPP_
