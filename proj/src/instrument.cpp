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

#include "raretrig/instrument.hpp"

#include <algorithm>
#include <map>
#include <vector>

#include "json.hpp"
#include "raretrig/rng.hpp"

namespace raretrig {

std::vector<BlockId> cfg_successors(const BasicBlock& b) {
  switch (b.term.kind) {
    case Terminator::Kind::kGoto:
      return {b.term.target};
    case Terminator::Kind::kBranch:
      return {b.term.then_target, b.term.else_target};
    // CycleEnd/Halt end the per-cycle walk; the next cycle re-enters at the
    // entry block by construction, not through a CFG edge.
    case Terminator::Kind::kCycleEnd:
    case Terminator::Kind::kHalt:
      return {};
  }
  return {};
}

std::map<BlockId, std::vector<BlockId>> cfg_predecessors(const Dut& dut) {
  std::map<BlockId, std::vector<BlockId>> preds;
  for (const auto& [id, blk] : dut.blocks) preds[id];  // ensure every key
  for (const auto& [id, blk] : dut.blocks)
    for (BlockId s : cfg_successors(blk)) preds[s].push_back(id);
  return preds;
}

bool DomTree::dominates(BlockId a, BlockId b) const {
  if (!reachable.count(b)) return false;
  for (BlockId cur = b;;) {
    if (cur == a) return true;
    auto it = idom.find(cur);
    if (it == idom.end()) return false;  // reached the entry
    cur = it->second;
  }
}

// Iterative dominators over reverse postorder (the classic data-flow
// formulation). DUT CFGs are small; simplicity beats Lengauer-Tarjan here.
DomTree compute_dominators(const Dut& dut) {
  DomTree tree;

  // Postorder via explicit DFS stack.
  std::vector<BlockId> postorder;
  std::map<BlockId, std::vector<BlockId>> succs;
  {
    std::vector<std::pair<BlockId, std::size_t>> stack;
    tree.reachable.insert(dut.entry);
    stack.emplace_back(dut.entry, 0);
    while (!stack.empty()) {
      auto& [id, next] = stack.back();
      auto it = succs.find(id);
      if (it == succs.end())
        it = succs.emplace(id, cfg_successors(dut.blocks.at(id))).first;
      if (next < it->second.size()) {
        BlockId s = it->second[next++];
        if (tree.reachable.insert(s).second) stack.emplace_back(s, 0);
      } else {
        postorder.push_back(id);
        stack.pop_back();
      }
    }
  }

  std::map<BlockId, int> rpo;
  {
    int n = static_cast<int>(postorder.size());
    for (int i = 0; i < n; ++i) rpo[postorder[i]] = n - 1 - i;
  }
  std::vector<BlockId> by_rpo(postorder.rbegin(), postorder.rend());

  std::map<BlockId, std::vector<BlockId>> preds;
  for (BlockId id : by_rpo)
    for (BlockId s : succs[id])
      if (tree.reachable.count(s)) preds[s].push_back(id);

  std::map<BlockId, BlockId> idom;
  idom[dut.entry] = dut.entry;
  auto intersect = [&](BlockId a, BlockId b) {
    while (a != b) {
      while (rpo[a] > rpo[b]) a = idom[a];
      while (rpo[b] > rpo[a]) b = idom[b];
    }
    return a;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (BlockId b : by_rpo) {
      if (b == dut.entry) continue;
      BlockId new_idom = 0;
      bool found = false;
      for (BlockId p : preds[b]) {
        if (!idom.count(p)) continue;  // not yet processed
        if (!found) {
          new_idom = p;
          found = true;
        } else {
          new_idom = intersect(p, new_idom);
        }
      }
      if (!found) continue;
      auto it = idom.find(b);
      if (it == idom.end() || it->second != new_idom) {
        idom[b] = new_idom;
        changed = true;
      }
    }
  }

  idom.erase(dut.entry);  // the entry has no immediate dominator
  tree.idom = std::move(idom);
  return tree;
}

InstrumentationPlan select_blocks(const Dut& dut, const DomTree& dom,
                                  const std::set<BranchEdge>& targets,
                                  InstrumentationPlan::Mode mode,
                                  std::uint64_t label_seed) {
  InstrumentationPlan plan;
  plan.mode = mode;
  plan.targets = targets;

  if (mode == InstrumentationPlan::Mode::kFull) {
    plan.instrumented = dom.reachable;
  } else {
    std::set<BlockId> keep;
    keep.insert(dut.entry);
    // (a) destinations of target arms
    for (const BranchEdge& t : targets) {
      auto it = dut.blocks.find(t.site);
      if (it == dut.blocks.end() ||
          it->second.term.kind != Terminator::Kind::kBranch)
        continue;
      keep.insert(t.arm == Arm::kThen ? it->second.term.then_target
                                      : it->second.term.else_target);
    }
    // (b) join points; (c) branch successors. Everything else sits on a
    // straight-line run whose visit is implied by its immediate dominator.
    auto preds = cfg_predecessors(dut);
    for (BlockId id : dom.reachable) {
      std::size_t reachable_preds = 0;
      for (BlockId p : preds[id])
        if (dom.reachable.count(p)) ++reachable_preds;
      if (reachable_preds >= 2) keep.insert(id);
      const BasicBlock& blk = dut.blocks.at(id);
      if (blk.term.kind == Terminator::Kind::kBranch) {
        keep.insert(blk.term.then_target);
        keep.insert(blk.term.else_target);
      }
    }
    // Targets may name unreachable arms; instrumenting them is harmless but
    // they must at least be real blocks (guaranteed by parse).
    for (BlockId id : keep)
      if (dom.reachable.count(id)) plan.instrumented.insert(id);
  }

  // Labels are a pure function of (label_seed, block id), so every plan over
  // the same design agrees on them regardless of mode or target set.
  for (BlockId id : plan.instrumented)
    plan.labels[id] =
        static_cast<std::uint16_t>(Rng::derive_seed(label_seed, id) & 0xffff);

  BlockId max_id = 0;
  for (BlockId id : plan.instrumented) max_id = std::max(max_id, id);
  plan.instrumented_flat.assign(std::size_t(max_id) + 1, 0);
  plan.labels_flat.assign(std::size_t(max_id) + 1, 0);
  for (BlockId id : plan.instrumented) {
    plan.instrumented_flat[id] = 1;
    plan.labels_flat[id] = plan.labels.at(id);
  }
  return plan;
}

std::set<BlockId> reconstruct_visited(const Dut& dut, const DomTree& dom,
                                      const InstrumentationPlan& plan,
                                      const Trace& trace) {
  std::set<BlockId> observed;
  for (const auto& [prev, cur] : trace.edge_sequence) {
    if (prev != kEntryEdgeSource) observed.insert(prev);
    observed.insert(cur);
  }

  // An omitted block's immediate dominator is a single-successor block whose
  // only successor is the omitted block itself, so visited(x) == visited(
  // idom(x)); recurse until an instrumented ancestor decides.
  std::map<BlockId, bool> memo;
  auto visited = [&](BlockId x, auto&& self) -> bool {
    auto it = memo.find(x);
    if (it != memo.end()) return it->second;
    bool v;
    if (plan.is_instrumented(x)) {
      v = observed.count(x) != 0;
    } else {
      auto d = dom.idom.find(x);
      v = d != dom.idom.end() && self(d->second, self);
    }
    memo.emplace(x, v);
    return v;
  };

  std::set<BlockId> out;
  for (BlockId id : dom.reachable)
    if (visited(id, visited)) out.insert(id);
  return out;
}

std::string plan_to_json(const InstrumentationPlan& plan) {
  nlohmann::json j;
  j["mode"] =
      plan.mode == InstrumentationPlan::Mode::kFull ? "full" : "selective";
  j["instrumented"] = nlohmann::json::array();
  for (BlockId id : plan.instrumented) j["instrumented"].push_back(id);
  j["labels"] = nlohmann::json::object();
  for (const auto& [id, label] : plan.labels)
    j["labels"][std::to_string(id)] = label;
  j["targets"] = nlohmann::json::array();
  for (const auto& t : plan.targets)
    j["targets"].push_back(
        {{"site", t.site}, {"arm", t.arm == Arm::kThen ? "then" : "else"}});
  return j.dump(2);
}

}  // namespace raretrig
