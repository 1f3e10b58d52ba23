#ifndef RARETRIG_TESTS_HELPERS_HPP_
#define RARETRIG_TESTS_HELPERS_HPP_

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "raretrig/dut.hpp"
#include "raretrig/instrument.hpp"

namespace raretrig::testing {

// Parses or fails the test with the parser's own message, so fixture typos
// show up as readable diagnostics instead of a dead Result.
inline Dut parse_ok(const std::string& text) {
  auto r = parse_dut(text);
  if (!r.ok()) {
    FAIL("parse failed: line ", r.error().line, " col ", r.error().col, " [",
         r.error().category, "] ", r.error().message);
  }
  return std::move(r).value();
}

inline InstrumentationPlan full_plan(const Dut& dut,
                                     std::uint64_t label_seed = 1) {
  return select_blocks(dut, compute_dominators(dut), {},
                       InstrumentationPlan::Mode::kFull, label_seed);
}

inline TestCase case_of(std::vector<std::uint8_t> bytes, std::uint64_t id = 1) {
  TestCase tc;
  tc.bytes = std::move(bytes);
  tc.id = id;
  return tc;
}

inline Trace run_ok(const Dut& dut, const InstrumentationPlan& plan,
                    const std::vector<std::uint8_t>& bytes) {
  auto r = execute(dut, case_of(bytes), plan);
  if (!r.ok()) FAIL("execute failed: ", r.error().message);
  return std::move(r).value();
}

inline std::set<BranchEdge> arms_of(const Trace& t) {
  std::set<BranchEdge> out;
  for (const auto& [site, taken] : t.branch_events)
    out.insert({site, taken ? Arm::kThen : Arm::kElse});
  return out;
}

// Every branch arm that exists in the design, declared-unreachable included.
inline std::set<BranchEdge> all_arms(const Dut& dut) {
  std::set<BranchEdge> out;
  for (const auto& [id, b] : dut.blocks)
    if (b.term.kind == Terminator::Kind::kBranch) {
      out.insert({id, Arm::kThen});
      out.insert({id, Arm::kElse});
    }
  return out;
}

// One input byte, one branch on x == 0x80, both sides halt. The smallest
// design with a findable-but-not-random rare arm.
inline const char* kMagicByteDut = R"(dut magic_byte
input x 8
output y 8

block 0:
  t = x == 0x80:8
  br t ? 1 : 2

block 1:
  v = x + 1:8
  halt { y = v }

block 2:
  v = x ^ 0:8
  halt { y = v }

entry 0
max_cycles 1
)";

// Straight-line design: no branches, single path, halts in one cycle.
inline const char* kStraightDut = R"(dut straight
input x 8
output y 8

block 0:
  v = x + 7:8
  halt { y = v }

entry 0
max_cycles 1
)";

// Two-cycle accumulator: latches a register, then halts on the second
// cycle. Exercises CycleEnd, register init and frame consumption.
inline const char* kAccumDut = R"(dut accum
input x 8
reg acc 8 init 5
reg n 1 init 0
output y 8

block 0:
  last_ = n == 1:1
  br last_ ? 2 : 1

block 1:
  a2 = acc + x
  n2 = n + 1:1
  cycle { acc = a2, n = n2 }

block 2:
  v = acc
  halt { y = v }

entry 0
max_cycles 2
)";

}  // namespace raretrig::testing

#endif  // RARETRIG_TESTS_HELPERS_HPP_
