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

#ifndef RARETRIG_DUT_HPP_
#define RARETRIG_DUT_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "raretrig/result.hpp"
#include "raretrig/rng.hpp"

namespace raretrig {

// ---------------------------------------------------------------------------
// Design-under-test IR: a synchronous design lowered to basic blocks over
// fixed-width unsigned bitvectors. Per clock cycle the design consumes one
// input frame, runs blocks from the entry until a CycleEnd (latch registers,
// next cycle) or Halt (drive outputs, stop). Locals are block-scoped; state
// crosses blocks/cycles only through registers.
// ---------------------------------------------------------------------------

using BlockId = std::uint32_t;

// Reserved pseudo-id for "before the first instrumented block" in traces.
// The parser rejects real blocks with this id.
inline constexpr BlockId kEntryEdgeSource = 0xffffffffu;

enum class Arm : std::uint8_t { kThen = 0, kElse = 1 };

// One side of a two-way branch, identified by the branching block.
struct BranchEdge {
  BlockId site = 0;
  Arm arm = Arm::kThen;

  auto operator<=>(const BranchEdge&) const = default;
};

std::string to_string(const BranchEdge& e);  // "12.then" / "12.else"

enum class BinOp : std::uint8_t {
  kAdd, kSub, kMul, kAnd, kOr, kXor, kShl, kShr,
  kEq, kNe, kLtu, kLeu, kGtu, kGeu,
};

enum class UnOp : std::uint8_t { kNot, kNeg };

inline bool is_comparison(BinOp op) { return op >= BinOp::kEq; }

inline std::uint64_t width_mask(unsigned width) {
  return width >= 64 ? ~0ull : ((1ull << width) - 1);
}

// Single source of truth for operator semantics: the interpreter, the
// symbolic evaluator and the constant folder all call these two.
std::uint64_t eval_unop(UnOp op, std::uint64_t a, unsigned width);
std::uint64_t eval_binop(BinOp op, std::uint64_t a, std::uint64_t b,
                         unsigned width);

// Expression tree as written in the source file. Widths are resolved during
// parsing; every node carries its result width (comparisons are width 1).
struct Expr {
  enum class Kind : std::uint8_t {
    kConst, kInputRef, kRegRef, kLocalRef, kUnary, kBinary,
  };

  Kind kind = Kind::kConst;
  std::uint8_t width = 1;

  std::uint64_t value = 0;   // kConst (already masked to width)
  std::uint32_t index = 0;   // resolved slot for input/reg/local refs
  std::string name;          // spelling for refs, kept for rendering
  UnOp un = UnOp::kNot;
  BinOp bin = BinOp::kAdd;
  std::vector<Expr> args;    // 1 for kUnary, 2 for kBinary

  bool operator==(const Expr&) const = default;
};

struct Statement {
  std::string local;  // name of the local this line defines
  Expr rhs;           // local's width == rhs.width

  bool operator==(const Statement&) const = default;
};

struct Terminator {
  enum class Kind : std::uint8_t { kGoto, kBranch, kCycleEnd, kHalt };

  Kind kind = Kind::kHalt;
  BlockId target = 0;                        // kGoto
  std::uint32_t cond_slot = 0;               // kBranch: width-1 local
  BlockId then_target = 0;
  BlockId else_target = 0;
  // kCycleEnd: (register index, local slot) pairs, one per declared register.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> latches;
  // kHalt: local slot per declared output, in declaration order.
  std::vector<std::uint32_t> output_slots;

  bool operator==(const Terminator&) const = default;
};

struct BasicBlock {
  BlockId id = 0;
  std::vector<Statement> stmts;  // locals are addressed by position
  Terminator term;

  // Resolved by validation for the interpreter's benefit: dense indices into
  // Dut::block_order (kGoto/kBranch targets). Not part of structural
  // equality; rebuilt whenever a Dut is (re)validated.
  std::uint32_t target_ix = 0;
  std::uint32_t then_ix = 0;
  std::uint32_t else_ix = 0;

  bool operator==(const BasicBlock& o) const {
    return id == o.id && stmts == o.stmts && term == o.term;
  }
};

struct Port {
  std::string name;
  std::uint8_t width = 1;  // 1..64

  bool operator==(const Port&) const = default;
};

struct Register {
  std::string name;
  std::uint8_t width = 1;
  std::uint64_t init = 0;

  bool operator==(const Register&) const = default;
};

struct Dut {
  std::string name;
  std::vector<Port> inputs;
  std::vector<Register> registers;
  std::vector<Port> outputs;
  std::map<BlockId, BasicBlock> blocks;
  BlockId entry = 0;
  std::uint32_t max_cycles = 1;
  std::uint64_t max_steps_per_cycle = 100000;
  // Branch arms the author asserts are dead (e.g. a safety check that cannot
  // fire). Excluded from rare-target identification.
  std::set<BranchEdge> declared_unreachable;

  // Derived at validation — execution plumbing, excluded from equality.
  std::vector<BlockId> block_order;            // sorted block ids
  std::uint32_t entry_ix = 0;                  // index into block_order
  std::vector<std::uint32_t> input_byte_off;   // per input, offset in frame
  std::size_t frame_bytes = 0;                 // sum of ceil(width/8)

  std::size_t frame_size() const { return frame_bytes; }
  const BasicBlock& block(BlockId id) const { return blocks.at(id); }

  bool operator==(const Dut& o) const {
    return name == o.name && inputs == o.inputs && registers == o.registers &&
           outputs == o.outputs && blocks == o.blocks && entry == o.entry &&
           max_cycles == o.max_cycles &&
           max_steps_per_cycle == o.max_steps_per_cycle &&
           declared_unreachable == o.declared_unreachable;
  }
};

// ---------------------------------------------------------------------------
// Test cases and traces
// ---------------------------------------------------------------------------

// A test case is raw frame bytes plus scheduling metadata maintained by the
// fuzzer (refreshed on each execution under the active plan).
struct TestCase {
  enum class Origin : std::uint8_t { kRandom, kFuzz, kConcolic, kUser };

  std::vector<std::uint8_t> bytes;
  std::uint64_t id = 0;
  Origin origin = Origin::kUser;
  std::uint64_t exec_time = 0;     // interpreter steps of last execution
  std::uint32_t bitmap_count = 0;  // distinct bitmap cells of last execution
  std::uint32_t depth = 0;         // mutation-chain depth from its seed
};

const char* origin_tag(TestCase::Origin origin);  // "random"/"fuzz"/...
Result<TestCase::Origin, std::string> origin_from_tag(const std::string& tag);

struct Trace {
  enum class End : std::uint8_t {
    kHalt, kInputExhausted, kMaxCycles, kStepBudget,
  };

  // (previous instrumented block, current instrumented block); the first
  // entry uses kEntryEdgeSource as its source. Restricted to the plan's
  // instrumented set.
  std::vector<std::pair<BlockId, BlockId>> edge_sequence;
  // Every two-way branch decision, instrumented or not.
  std::vector<std::pair<BlockId, bool>> branch_events;
  std::vector<std::uint64_t> outputs;  // meaningful only when halted
  bool has_outputs = false;
  std::uint32_t cycles_run = 0;
  std::uint64_t steps_run = 0;
  End terminated_by = End::kHalt;
};

const char* end_tag(Trace::End end);

struct ExecError {
  enum class Kind : std::uint8_t { kPartialFrame, kNoFrames };
  Kind kind = Kind::kPartialFrame;
  std::size_t byte_len = 0;    // offending test-case length
  std::size_t frame_bytes = 0;
  std::string message;
};

struct ParseError {
  std::size_t line = 0;  // 1-based
  std::size_t col = 0;   // 1-based
  // One of: "syntax", "duplicate-name", "unknown-name", "width-mismatch",
  // "dangling-target", "register-not-updated", "bad-constant", "bad-width".
  std::string category;
  std::string message;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Parses and validates the textual DUT format. On success the returned Dut
// has all derived fields (block order, frame layout, resolved slots) filled
// in and every width invariant checked.
Result<Dut, ParseError> parse_dut(const std::string& text);

// Serializes a Dut back to the textual format. parse_dut(render_dut(d)) == d
// for every valid d.
std::string render_dut(const Dut& dut);

struct InstrumentationPlan;  // see instrument.hpp

// Runs the design over the test case's frames. Fails only on frame-layout
// errors; resource exhaustion (cycles/steps) is a normal Trace outcome.
// `plan` controls which blocks report into Trace::edge_sequence.
Result<Trace, ExecError> execute(const Dut& dut, const TestCase& tc,
                                 const InstrumentationPlan& plan);

// Draws `cycles` frames of uniform random bytes.
TestCase random_testcase(const Dut& dut, std::uint32_t cycles, Rng& rng);

// When true, the interpreter checks every produced value against its width
// mask and throws std::logic_error on violation. Tests flip this on; the
// default keeps the hot path unconditionally masked but uncheck(ed).
void set_width_checks(bool enabled);
bool width_checks_enabled();

}  // namespace raretrig

#endif  // RARETRIG_DUT_HPP_
