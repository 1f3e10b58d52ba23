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

#include "raretrig/concolic.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <thread>

#include "raretrig/rng.hpp"

#include "interp.hpp"
#include "symprog.hpp"

namespace raretrig {

// ---------------------------------------------------------------------------
// Expression constructors
// ---------------------------------------------------------------------------

SymExprPtr sym_byte(std::uint32_t byte_offset, unsigned width) {
  auto e = std::make_shared<SymExpr>();
  e->kind = SymExpr::Kind::kByte;
  e->width = static_cast<std::uint8_t>(width);
  e->byte_offset = byte_offset;
  return e;
}

SymExprPtr sym_const(std::uint64_t value, unsigned width) {
  auto e = std::make_shared<SymExpr>();
  e->kind = SymExpr::Kind::kConst;
  e->width = static_cast<std::uint8_t>(width);
  e->value = value & width_mask(width);
  return e;
}

SymExprPtr sym_unary(UnOp op, SymExprPtr a) {
  if (a->kind == SymExpr::Kind::kConst)
    return sym_const(eval_unop(op, a->value, a->width), a->width);
  auto e = std::make_shared<SymExpr>();
  e->kind = SymExpr::Kind::kUnary;
  e->width = a->width;
  e->un = op;
  e->a = std::move(a);
  return e;
}

SymExprPtr sym_binary(BinOp op, SymExprPtr a, SymExprPtr b) {
  const unsigned rw = is_comparison(op) ? 1 : a->width;
  if (a->kind == SymExpr::Kind::kConst && b->kind == SymExpr::Kind::kConst)
    return sym_const(eval_binop(op, a->value, b->value, a->width), rw);

  // Identity folds only; anything cleverer could erase path structure.
  if (b->kind == SymExpr::Kind::kConst) {
    const std::uint64_t bv = b->value;
    switch (op) {
      case BinOp::kOr:
      case BinOp::kXor:
      case BinOp::kAdd:
      case BinOp::kSub:
      case BinOp::kShl:
      case BinOp::kShr:
        if (bv == 0) return a;
        break;
      case BinOp::kAnd:
        if (bv == width_mask(a->width)) return a;
        break;
      case BinOp::kMul:
        if (bv == 1) return a;
        break;
      default:
        break;
    }
  }
  if (a->kind == SymExpr::Kind::kConst) {
    const std::uint64_t av = a->value;
    switch (op) {
      case BinOp::kOr:
      case BinOp::kXor:
      case BinOp::kAdd:
        if (av == 0) return b;
        break;
      case BinOp::kAnd:
        if (av == width_mask(b->width)) return b;
        break;
      case BinOp::kMul:
        if (av == 1) return b;
        break;
      default:
        break;
    }
  }

  auto e = std::make_shared<SymExpr>();
  e->kind = SymExpr::Kind::kBinary;
  e->width = static_cast<std::uint8_t>(rw);
  e->bin = op;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

std::uint64_t sym_eval(const SymExpr& e,
                       const std::map<std::uint32_t, std::uint8_t>& bytes) {
  detail::SymProg prog;
  // Wrap in a non-owning shared_ptr: add() only reads through it.
  const std::int32_t root =
      prog.add(SymExprPtr(&e, [](const SymExpr*) {}));
  std::vector<std::uint64_t> vals;
  prog.eval(bytes, vals);
  return vals[root];
}

void sym_collect_offsets(const SymExpr& e, std::set<std::uint32_t>& out) {
  std::vector<const SymExpr*> work{&e};
  std::set<const SymExpr*> seen;
  while (!work.empty()) {
    const SymExpr* n = work.back();
    work.pop_back();
    if (!seen.insert(n).second) continue;
    if (n->kind == SymExpr::Kind::kByte) out.insert(n->byte_offset);
    if (n->a) work.push_back(n->a.get());
    if (n->b) work.push_back(n->b.get());
  }
}

namespace {

const char* binop_sym(BinOp op) {
  switch (op) {
    case BinOp::kAdd: return "+";
    case BinOp::kSub: return "-";
    case BinOp::kMul: return "*";
    case BinOp::kAnd: return "&";
    case BinOp::kOr: return "|";
    case BinOp::kXor: return "^";
    case BinOp::kShl: return "<<";
    case BinOp::kShr: return ">>";
    case BinOp::kEq: return "==";
    case BinOp::kNe: return "!=";
    case BinOp::kLtu: return "<u";
    case BinOp::kLeu: return "<=u";
    case BinOp::kGtu: return ">u";
    case BinOp::kGeu: return ">=u";
  }
  return "?";
}

void sym_print(const SymExpr& e, std::string& out) {
  if (out.size() > 1 << 16) return;  // debug tool; cap runaway DAGs
  switch (e.kind) {
    case SymExpr::Kind::kByte:
      out += "in[" + std::to_string(e.byte_offset) + "]";
      break;
    case SymExpr::Kind::kConst: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "0x%llx",
                    static_cast<unsigned long long>(e.value));
      out += buf;
      out += ":" + std::to_string(unsigned(e.width));
      break;
    }
    case SymExpr::Kind::kUnary:
      out += e.un == UnOp::kNot ? "~" : "-";
      out += "(";
      sym_print(*e.a, out);
      out += ")";
      break;
    case SymExpr::Kind::kBinary:
      out += "(";
      sym_print(*e.a, out);
      out += " ";
      out += binop_sym(e.bin);
      out += " ";
      sym_print(*e.b, out);
      out += ")";
      break;
  }
}

}  // namespace

std::string sym_to_string(const SymExpr& e) {
  std::string out;
  sym_print(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Shadow execution
// ---------------------------------------------------------------------------

namespace {

// Value = concrete word plus (when input-dependent) its expression.
struct ShadowPolicy {
  struct Value {
    std::uint64_t c = 0;
    SymExprPtr s;  // null means "plain constant"
  };

  const SymRange* sym = nullptr;
  const std::vector<std::uint8_t>* bytes = nullptr;
  PathCondition* path = nullptr;

  Value make_const(std::uint64_t v, unsigned width) const {
    return {v & width_mask(width), nullptr};
  }

  Value input_value(std::uint32_t byte_off, unsigned nbytes, unsigned width,
                    std::uint64_t concrete) const {
    bool any = false;
    for (unsigned b = 0; b < nbytes; ++b)
      if (sym->contains(byte_off + b)) any = true;
    if (!any) return {concrete, nullptr};
    // Little-endian assembly. Shifting inside the target width both places
    // the byte and trims top-byte bits past the input's width.
    SymExprPtr acc = sym_const(0, width);
    for (unsigned b = 0; b < nbytes; ++b) {
      const std::uint32_t off = byte_off + b;
      SymExprPtr piece = sym->contains(off)
                             ? sym_byte(off, width)
                             : sym_const((*bytes)[off], width);
      if (b) piece = sym_binary(BinOp::kShl, piece, sym_const(8 * b, width));
      acc = sym_binary(BinOp::kOr, std::move(acc), std::move(piece));
    }
    return {concrete, std::move(acc)};
  }

  Value apply_un(UnOp op, const Value& a, unsigned w) const {
    return {eval_unop(op, a.c, w), a.s ? sym_unary(op, a.s) : nullptr};
  }

  Value apply_bin(BinOp op, const Value& a, const Value& b, unsigned rw,
                  unsigned operand_w) const {
    const std::uint64_t c = eval_binop(op, a.c, b.c, rw);
    if (!a.s && !b.s) return {c, nullptr};
    SymExprPtr sa = a.s ? a.s : sym_const(a.c, operand_w);
    SymExprPtr sb = b.s ? b.s : sym_const(b.c, operand_w);
    return {c, sym_binary(op, std::move(sa), std::move(sb))};
  }

  std::uint64_t concrete(const Value& v) const { return v.c; }

  void on_branch(BlockId site, const Value& cond, bool taken) const {
    if (cond.s) path->push_back({site, cond.s, taken});
  }
};

}  // namespace

Result<ShadowResult, ExecError> shadow_execute(const Dut& dut,
                                               const TestCase& tc,
                                               const InstrumentationPlan& plan,
                                               const SymRange& sym) {
  ShadowResult out;
  ShadowPolicy pol;
  pol.sym = &sym;
  pol.bytes = &tc.bytes;
  pol.path = &out.path;
  auto r = detail::run_interp(dut, tc, plan, pol);
  if (!r.ok()) return r.error();
  out.trace = std::move(r.value());
  return out;
}

// ---------------------------------------------------------------------------
// Execution tree
// ---------------------------------------------------------------------------

void ExecutionTree::merge(const PathCondition& path,
                          const std::vector<std::uint8_t>& bytes) {
  std::unique_ptr<ExecTreeNode>* slot = &root;
  for (const auto& entry : path) {
    if (!*slot) {
      auto n = std::make_unique<ExecTreeNode>();
      n->site = entry.site;
      n->predicate = entry.predicate;
      n->base_bytes = bytes;
      *slot = std::move(n);
    }
    ExecTreeNode* cur = slot->get();
    if (cur->site != entry.site) {
      // Same decision prefix, different next site: concrete bytes outside
      // the symbolic range steered execution. Nothing sound to merge here.
      ++divergences;
      return;
    }
    cur->covered[entry.taken ? 1 : 0] = true;
    slot = &cur->child[entry.taken ? 1 : 0];
  }
  ++paths_merged;
}

namespace {

template <typename Fn>
void tree_walk(const std::unique_ptr<ExecTreeNode>& n, Fn&& fn) {
  if (!n) return;
  // Iterative preorder; paths through cycle loops can be long.
  std::vector<ExecTreeNode*> work{n.get()};
  while (!work.empty()) {
    ExecTreeNode* cur = work.back();
    work.pop_back();
    fn(cur);
    // Push arm 1 first so arm 0 is visited first (LIFO).
    if (cur->child[1]) work.push_back(cur->child[1].get());
    if (cur->child[0]) work.push_back(cur->child[0].get());
  }
}

}  // namespace

void ExecutionTree::reset_attempts() {
  tree_walk(root, [](ExecTreeNode* n) { n->attempted = {false, false}; });
}

std::uint64_t ExecutionTree::node_count() const {
  std::uint64_t c = 0;
  tree_walk(root, [&](ExecTreeNode*) { ++c; });
  return c;
}

std::set<BranchEdge> ExecutionTree::covered_arms() const {
  std::set<BranchEdge> out;
  tree_walk(root, [&](ExecTreeNode* n) {
    if (n->covered[1]) out.insert({n->site, Arm::kThen});
    if (n->covered[0]) out.insert({n->site, Arm::kElse});
  });
  return out;
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

struct ConcolicEngine::FrontierItem {
  ExecTreeNode* node = nullptr;
  bool arm_taken = false;  // decision value the solver should force
};

ConcolicEngine::ConcolicEngine(const Dut& dut, const InstrumentationPlan& plan,
                               const SymRange& sym, ExecutionTree& tree)
    : dut_(dut), plan_(plan), sym_(sym), tree_(tree) {}

void ConcolicEngine::absorb_seed(const TestCase& tc) {
  auto r = shadow_execute(dut_, tc, plan_, sym_);
  if (!r.ok()) return;  // malformed frames carry no path information
  const ShadowResult& sr = r.value();
  for (const auto& [site, taken] : sr.trace.branch_events)
    covered_.insert({site, taken ? Arm::kThen : Arm::kElse});
  tree_.merge(sr.path, tc.bytes);
}

std::vector<ConcolicEngine::FrontierItem> ConcolicEngine::collect_frontier(
    const std::set<BranchEdge>& rare) {
  std::vector<FrontierItem> rare_items, rest;
  parents_.clear();
  tree_walk(tree_.root, [&](ExecTreeNode* n) {
    for (int ix = 0; ix < 2; ++ix)
      if (n->child[ix]) parents_[n->child[ix].get()] = {n, ix == 1};
    auto cap = negations_.find(n->site);
    if (cap != negations_.end() && cap->second >= cap_per_site_) return;
    for (int ix = 0; ix < 2; ++ix) {
      if (n->covered[ix] || n->attempted[ix]) continue;
      const BranchEdge edge{n->site, ix == 1 ? Arm::kThen : Arm::kElse};
      (rare.count(edge) ? rare_items : rest)
          .push_back(FrontierItem{n, ix == 1});
    }
  });
  rare_items.insert(rare_items.end(), rest.begin(), rest.end());
  return rare_items;
}

std::vector<GeneratedCase> ConcolicEngine::run(
    const std::vector<TestCase>& seeds, const ConcolicBudget& budget,
    const std::set<BranchEdge>& rare, unsigned jobs) {
  tree_.reset_attempts();
  negations_.clear();
  cap_per_site_ = budget.max_loop_negations;

  // Seed absorption. Shadow runs are independent, so they may go wide; the
  // merges stay in seed order either way.
  if (jobs > 1 && seeds.size() > 1) {
    std::vector<std::optional<Result<ShadowResult, ExecError>>> slots(
        seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= seeds.size()) return;
        slots[i].emplace(shadow_execute(dut_, seeds[i], plan_, sym_));
      }
    };
    std::vector<std::thread> threads;
    const unsigned n =
        static_cast<unsigned>(std::min<std::size_t>(jobs, seeds.size()));
    threads.reserve(n);
    for (unsigned t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (!slots[i]->ok()) continue;
      const ShadowResult& sr = slots[i]->value();
      for (const auto& [site, taken] : sr.trace.branch_events)
        covered_.insert({site, taken ? Arm::kThen : Arm::kElse});
      tree_.merge(sr.path, seeds[i].bytes);
    }
  } else {
    for (const TestCase& tc : seeds) absorb_seed(tc);
  }

  if (!tree_.root && seeds.empty()) {
    // Nothing to stand on: run an all-zero case to expose the first
    // symbolic decisions.
    TestCase boot;
    boot.bytes.assign(std::size_t(dut_.frame_bytes) *
                          std::max<std::uint32_t>(dut_.max_cycles, 1),
                      0);
    boot.origin = TestCase::Origin::kConcolic;
    absorb_seed(boot);
  }

  std::vector<GeneratedCase> out;
  for (;;) {
    if (budget.max_solves && stats_.solver_calls >= *budget.max_solves) break;
    if (budget.deadline &&
        std::chrono::steady_clock::now() >= *budget.deadline)
      break;

    auto frontier = collect_frontier(rare);
    if (frontier.empty()) {
      stats_.frontier_exhausted = true;
      break;
    }
    FrontierItem item = frontier.front();
    item.node->attempted[item.arm_taken ? 1 : 0] = true;
    ++negations_[item.node->site];

    // Path prefix constraints (root to target, via the parent links built
    // during collection), then the negated target decision.
    std::vector<Constraint> cs;
    {
      std::vector<Constraint> rev;
      const ExecTreeNode* cur = item.node;
      for (auto it = parents_.find(cur); it != parents_.end();
           it = parents_.find(cur)) {
        rev.push_back({it->second.first->predicate, it->second.second});
        cur = it->second.first;
      }
      cs.assign(rev.rbegin(), rev.rend());
      cs.push_back({item.node->predicate, item.arm_taken});
    }

    SolveBudget sb = budget.per_solve;
    sb.rng_seed =
        Rng::derive_seed(budget.per_solve.rng_seed, stats_.solver_calls);
    ++stats_.solver_calls;
    const SolveResult res = solve(cs, sb);
    switch (res.status) {
      case SolveStatus::kUnsat:
        ++stats_.unsat;
        continue;
      case SolveStatus::kUnknown:
        ++stats_.unknown;
        continue;
      case SolveStatus::kSat:
        break;
    }
    ++stats_.sat;

    TestCase tc;
    tc.bytes = item.node->base_bytes;
    for (const auto& [off, v] : res.assignment)
      if (off < tc.bytes.size()) tc.bytes[off] = v;
    tc.id = next_id_++;
    tc.origin = TestCase::Origin::kConcolic;

    absorb_seed(tc);  // merge right away so nested negations can chain
    out.push_back(GeneratedCase{
        std::move(tc), item.node->site,
        item.arm_taken ? Arm::kThen : Arm::kElse});

    if (!rare.empty()) {
      bool all = true;
      for (const auto& edge : rare)
        if (!covered_.count(edge)) {
          all = false;
          break;
        }
      if (all) break;
    }
  }
  return out;
}

std::vector<TestCase> concol_exec(const Dut& dut,
                                  const InstrumentationPlan& plan,
                                  const std::vector<TestCase>& seeds,
                                  const SymRange& sym,
                                  const ConcolicBudget& budget,
                                  ExecutionTree& tree,
                                  const std::set<BranchEdge>& rare) {
  ConcolicEngine eng(dut, plan, sym, tree);
  std::vector<GeneratedCase> gen = eng.run(seeds, budget, rare);
  std::vector<TestCase> out;
  out.reserve(gen.size());
  for (auto& g : gen) out.push_back(std::move(g.tc));
  return out;
}

}  // namespace raretrig
