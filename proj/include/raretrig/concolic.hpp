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

#ifndef RARETRIG_CONCOLIC_HPP_
#define RARETRIG_CONCOLIC_HPP_

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "raretrig/dut.hpp"
#include "raretrig/instrument.hpp"

namespace raretrig {

// ---------------------------------------------------------------------------
// Symbolic expressions over test-case bytes
// ---------------------------------------------------------------------------

struct SymExpr;
using SymExprPtr = std::shared_ptr<const SymExpr>;

// Immutable DAG node. kByte is "the test-case byte at byte_offset,
// zero-extended to width"; everything else mirrors the IR ops.
struct SymExpr {
  enum class Kind : std::uint8_t { kByte, kConst, kUnary, kBinary };

  Kind kind = Kind::kConst;
  std::uint8_t width = 1;
  std::uint32_t byte_offset = 0;  // kByte
  std::uint64_t value = 0;        // kConst
  UnOp un = UnOp::kNot;
  BinOp bin = BinOp::kAdd;
  SymExprPtr a, b;
};

// Constructors fold constants (const op const -> const) and a few identities
// (x|0, x^0, x+0, x&~0, x*1, x<<0, x>>0) so register chains across cycles
// stay small. No deeper rewriting: dead conditions must stay symbolic.
SymExprPtr sym_byte(std::uint32_t byte_offset, unsigned width);
SymExprPtr sym_const(std::uint64_t value, unsigned width);
SymExprPtr sym_unary(UnOp op, SymExprPtr a);
SymExprPtr sym_binary(BinOp op, SymExprPtr a, SymExprPtr b);

// Evaluates under a byte assignment; offsets absent from the map read 0.
std::uint64_t sym_eval(const SymExpr& e,
                       const std::map<std::uint32_t, std::uint8_t>& bytes);

// Byte offsets referenced by the expression.
void sym_collect_offsets(const SymExpr& e, std::set<std::uint32_t>& out);

std::string sym_to_string(const SymExpr& e);  // debugging / reports

// Byte ranges of the test case treated as symbolic. Empty == everything.
struct SymRange {
  struct Span {
    std::uint32_t offset = 0;
    std::uint32_t length = 0;
  };
  std::vector<Span> spans;  // empty means "all bytes symbolic"

  bool contains(std::uint32_t byte_offset) const {
    if (spans.empty()) return true;
    for (const auto& s : spans)
      if (byte_offset >= s.offset && byte_offset < s.offset + s.length)
        return true;
    return false;
  }
};

// ---------------------------------------------------------------------------
// Shadow execution
// ---------------------------------------------------------------------------

struct PathConditionEntry {
  BlockId site = 0;
  SymExprPtr predicate;  // width-1 branch condition
  bool taken = false;    // observed concrete decision
};

using PathCondition = std::vector<PathConditionEntry>;

struct ShadowResult {
  Trace trace;  // identical to what plain execute() produces
  PathCondition path;
};

// Concrete execution that additionally tracks a symbolic expression per
// value influenced by symbolic input bytes, recording every branch whose
// condition is symbolic.
Result<ShadowResult, ExecError> shadow_execute(const Dut& dut,
                                               const TestCase& tc,
                                               const InstrumentationPlan& plan,
                                               const SymRange& sym);

// ---------------------------------------------------------------------------
// Constraint solving
// ---------------------------------------------------------------------------

struct Constraint {
  SymExprPtr predicate;   // width-1
  bool required = false;  // predicate must evaluate to this truth value
};

enum class SolveStatus : std::uint8_t { kSat, kUnsat, kUnknown };

struct SolveResult {
  SolveStatus status = SolveStatus::kUnknown;
  // On kSat: value per referenced byte offset; verified by substitution.
  std::map<std::uint32_t, std::uint8_t> assignment;
  std::uint32_t tier = 0;  // 1 = inversion, 2 = enumeration, 3 = search
};

struct SolveBudget {
  std::uint64_t max_evals = 2000;  // tier-3 candidate evaluations
  std::uint64_t rng_seed = 0;      // tier-3 search stream
};

// Three-tier bitvector solver. Tier 1 inverts operator chains against
// constants (bit-level pins, disjoint-mask splits, bounded disjunct choice);
// tier 2 enumerates exhaustively when the referenced bytes carry <= 24 bits;
// tier 3 is a seeded hill climb under budget.max_evals. kSat answers are
// always verified by substitution before being returned; kUnsat is only
// reported when derived by equivalence-preserving steps or exhaustion.
SolveResult solve(const std::vector<Constraint>& constraints,
                  const SolveBudget& budget);

// ---------------------------------------------------------------------------
// Execution tree
// ---------------------------------------------------------------------------

// Trie over symbolic branch decisions. Each node is one occurrence of a
// symbolic branch along a path; children index by the decision taken.
struct ExecTreeNode {
  BlockId site = 0;
  SymExprPtr predicate;
  std::array<bool, 2> covered{false, false};    // [taken==false, taken==true]
  std::array<bool, 2> attempted{false, false};  // negation tried this phase
  std::array<std::unique_ptr<ExecTreeNode>, 2> child;
  // Bytes of the first test case that reached this node; solver patches are
  // applied on top of these.
  std::vector<std::uint8_t> base_bytes;
};

struct ExecutionTree {
  std::unique_ptr<ExecTreeNode> root;
  std::uint64_t paths_merged = 0;
  std::uint64_t divergences = 0;  // merge aborted on site mismatch

  // Folds one shadow path into the trie; records covered arms.
  void merge(const PathCondition& path, const std::vector<std::uint8_t>& bytes);

  // Clears per-phase negation-attempt marks.
  void reset_attempts();

  std::uint64_t node_count() const;
  std::set<BranchEdge> covered_arms() const;
};

// ---------------------------------------------------------------------------
// Concolic engine
// ---------------------------------------------------------------------------

struct ConcolicBudget {
  std::optional<std::uint64_t> max_solves;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  SolveBudget per_solve;
  // Per branch site, per phase: bound on negation attempts, so input-
  // dependent loops can't monopolize the solver.
  std::uint32_t max_loop_negations = 8;
};

struct GeneratedCase {
  TestCase tc;
  BlockId site = 0;  // arm this case was solved to take
  Arm arm = Arm::kThen;
};

struct ConcolicStats {
  std::uint64_t solver_calls = 0;
  std::uint64_t sat = 0;
  std::uint64_t unsat = 0;
  std::uint64_t unknown = 0;
  bool frontier_exhausted = false;
};

// One concolic phase: shadow-executes the seeds (most-novel first, by
// caller-provided order), merges paths into the shared tree, then walks the
// frontier depth-first — rare-target arms first — negating uncovered
// decisions and re-executing solver outputs until the budget, the frontier,
// or the rare set is exhausted. Generated cases are merged back immediately
// so one phase can chain through nested conditions. If both seed list and
// tree are empty, a zero-filled case (max_cycles frames) bootstraps the tree.
class ConcolicEngine {
 public:
  ConcolicEngine(const Dut& dut, const InstrumentationPlan& plan,
                 const SymRange& sym, ExecutionTree& tree);

  std::vector<GeneratedCase> run(const std::vector<TestCase>& seeds,
                                 const ConcolicBudget& budget,
                                 const std::set<BranchEdge>& rare,
                                 unsigned jobs = 1);

  const ConcolicStats& stats() const { return stats_; }
  const std::set<BranchEdge>& covered() const { return covered_; }

 private:
  struct FrontierItem;

  void absorb_seed(const TestCase& tc);
  std::vector<FrontierItem> collect_frontier(const std::set<BranchEdge>& rare);

  const Dut& dut_;
  const InstrumentationPlan& plan_;
  SymRange sym_;
  ExecutionTree& tree_;
  ConcolicStats stats_;
  std::set<BranchEdge> covered_;  // branch arms seen by any shadow run
  std::map<BlockId, std::uint32_t> negations_;  // per-site, this phase
  std::uint32_t cap_per_site_ = 8;
  // Parent links for the latest frontier collection (the trie itself only
  // points downward); value is (parent, decision that leads here).
  std::map<const ExecTreeNode*, std::pair<ExecTreeNode*, bool>> parents_;
  std::uint64_t next_id_ = 1;
};

// One-shot wrapper matching the module-level operation: runs a single phase
// over `seeds` and returns the generated cases.
std::vector<TestCase> concol_exec(const Dut& dut,
                                  const InstrumentationPlan& plan,
                                  const std::vector<TestCase>& seeds,
                                  const SymRange& sym,
                                  const ConcolicBudget& budget,
                                  ExecutionTree& tree,
                                  const std::set<BranchEdge>& rare);

}  // namespace raretrig

#endif  // RARETRIG_CONCOLIC_HPP_
