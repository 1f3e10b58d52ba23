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

#include <atomic>

#include "raretrig/dut.hpp"
#include "raretrig/instrument.hpp"
#include "interp.hpp"

namespace raretrig {

namespace {
std::atomic<bool> g_width_checks{false};
}  // namespace

void set_width_checks(bool enabled) { g_width_checks.store(enabled); }
bool width_checks_enabled() { return g_width_checks.load(); }

std::uint64_t eval_unop(UnOp op, std::uint64_t a, unsigned width) {
  const std::uint64_t m = width_mask(width);
  switch (op) {
    case UnOp::kNot: return ~a & m;
    case UnOp::kNeg: return (0 - a) & m;  // two's-complement wrap
  }
  return 0;
}

std::uint64_t eval_binop(BinOp op, std::uint64_t a, std::uint64_t b,
                         unsigned width) {
  const std::uint64_t m = width_mask(width);
  switch (op) {
    case BinOp::kAdd: return (a + b) & m;
    case BinOp::kSub: return (a - b) & m;
    case BinOp::kMul: return (a * b) & m;
    case BinOp::kAnd: return a & b;
    case BinOp::kOr: return a | b;
    case BinOp::kXor: return a ^ b;
    // Shift amounts >= width drain to zero (no UB, no implementation quirks).
    case BinOp::kShl: return b >= width ? 0 : (a << b) & m;
    case BinOp::kShr: return b >= width ? 0 : a >> b;
    // Comparisons receive already-masked operands; result width is 1.
    case BinOp::kEq: return a == b ? 1 : 0;
    case BinOp::kNe: return a != b ? 1 : 0;
    case BinOp::kLtu: return a < b ? 1 : 0;
    case BinOp::kLeu: return a <= b ? 1 : 0;
    case BinOp::kGtu: return a > b ? 1 : 0;
    case BinOp::kGeu: return a >= b ? 1 : 0;
  }
  return 0;
}

Result<Trace, ExecError> execute(const Dut& dut, const TestCase& tc,
                                 const InstrumentationPlan& plan) {
  detail::ConcretePolicy pol;
  return detail::run_interp(dut, tc, plan, pol);
}

TestCase random_testcase(const Dut& dut, std::uint32_t cycles, Rng& rng) {
  TestCase tc;
  tc.origin = TestCase::Origin::kRandom;
  tc.bytes.resize(std::size_t(cycles) * dut.frame_bytes);
  for (auto& b : tc.bytes) b = rng.next_byte();
  return tc;
}

}  // namespace raretrig
