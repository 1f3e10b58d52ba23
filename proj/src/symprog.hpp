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

// Flattened form of a SymExpr DAG: postorder node array, deduplicated by
// node address. Evaluation is a single forward pass, which keeps shared
// subtrees cheap and avoids recursing down register chains that can grow
// with the cycle count. The solver's enumeration/search tiers re-evaluate
// the same program millions of times, hence the slot-bound fast path.

#ifndef RARETRIG_SRC_SYMPROG_HPP_
#define RARETRIG_SRC_SYMPROG_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "raretrig/concolic.hpp"

namespace raretrig::detail {

struct SymProg {
  struct Node {
    SymExpr::Kind kind = SymExpr::Kind::kConst;
    std::uint8_t width = 1;
    UnOp un = UnOp::kNot;
    BinOp bin = BinOp::kAdd;
    std::uint32_t byte_offset = 0;
    std::uint64_t value = 0;
    std::int32_t a = -1, b = -1;
    std::int32_t slot = -1;  // kByte: index into the bound domain, else -1
  };

  std::vector<Node> nodes;                       // postorder
  std::map<const SymExpr*, std::int32_t> index;  // DAG node -> position

  // Adds (or finds) the subtree rooted at `e`; returns its node position.
  // Iterative so chains tens of thousands of nodes deep cannot blow the
  // call stack.
  std::int32_t add(const SymExprPtr& e) {
    if (!e) return -1;
    struct Item {
      const SymExpr* node;
      int stage;
    };
    std::vector<Item> work{{e.get(), 0}};
    while (!work.empty()) {
      Item& it = work.back();
      const SymExpr* n = it.node;
      if (index.count(n)) {
        work.pop_back();
        continue;
      }
      if (it.stage == 0) {
        it.stage = 1;
        if (n->a && !index.count(n->a.get())) {
          work.push_back({n->a.get(), 0});
          continue;
        }
      }
      if (it.stage == 1) {
        it.stage = 2;
        if (n->b && !index.count(n->b.get())) {
          work.push_back({n->b.get(), 0});
          continue;
        }
      }
      Node out;
      out.kind = n->kind;
      out.width = n->width;
      out.un = n->un;
      out.bin = n->bin;
      out.byte_offset = n->byte_offset;
      out.value = n->value;
      out.a = n->a ? index.at(n->a.get()) : -1;
      out.b = n->b ? index.at(n->b.get()) : -1;
      index.emplace(n, static_cast<std::int32_t>(nodes.size()));
      nodes.push_back(out);
      work.pop_back();
    }
    return index.at(e.get());
  }

  // Maps every kByte node onto its position in `domain` (sorted offsets).
  // Offsets outside the domain keep slot -1 and read as 0.
  void bind(const std::vector<std::uint32_t>& domain) {
    for (Node& n : nodes) {
      if (n.kind != SymExpr::Kind::kByte) continue;
      n.slot = -1;
      auto lo = std::lower_bound(domain.begin(), domain.end(), n.byte_offset);
      if (lo != domain.end() && *lo == n.byte_offset)
        n.slot = static_cast<std::int32_t>(lo - domain.begin());
    }
  }

  // Generic evaluation: byte values looked up in a map, absent reads 0.
  void eval(const std::map<std::uint32_t, std::uint8_t>& bytes,
            std::vector<std::uint64_t>& values) const {
    values.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Node& n = nodes[i];
      switch (n.kind) {
        case SymExpr::Kind::kConst:
          values[i] = n.value;
          break;
        case SymExpr::Kind::kByte: {
          auto it = bytes.find(n.byte_offset);
          values[i] =
              (it == bytes.end() ? 0 : it->second) & width_mask(n.width);
          break;
        }
        case SymExpr::Kind::kUnary:
          values[i] = eval_unop(n.un, values[n.a], n.width);
          break;
        case SymExpr::Kind::kBinary:
          values[i] = eval_binop(n.bin, values[n.a], values[n.b], n.width);
          break;
      }
    }
  }

  // Slot-bound evaluation for the solver's inner loops; call bind() first.
  void eval_fast(const std::uint8_t* domain_bytes,
                 std::vector<std::uint64_t>& values) const {
    values.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Node& n = nodes[i];
      switch (n.kind) {
        case SymExpr::Kind::kConst:
          values[i] = n.value;
          break;
        case SymExpr::Kind::kByte:
          values[i] = (n.slot < 0 ? 0 : domain_bytes[n.slot]) &
                      width_mask(n.width);
          break;
        case SymExpr::Kind::kUnary:
          values[i] = eval_unop(n.un, values[n.a], n.width);
          break;
        case SymExpr::Kind::kBinary:
          values[i] = eval_binop(n.bin, values[n.a], values[n.b], n.width);
          break;
      }
    }
  }
};

}  // namespace raretrig::detail

#endif  // RARETRIG_SRC_SYMPROG_HPP_
