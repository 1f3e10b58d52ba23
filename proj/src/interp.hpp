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

// Shared interpreter core. Concrete execution and shadow-symbolic execution
// are the same walk over the same cycle/step accounting; only the value
// domain differs. Keeping one template here means the two cannot drift.
//
// Policy requirements:
//   using Value;
//   Value make_const(uint64_t v, unsigned width);
//   Value input_value(uint32_t byte_off, unsigned nbytes, unsigned width,
//                     uint64_t concrete);      // one input, one frame
//   Value apply_un(UnOp, const Value&, unsigned width);
//   Value apply_bin(BinOp, const Value&, const Value&, unsigned result_width,
//                   unsigned operand_width);
//   uint64_t concrete(const Value&) const;
//   void on_branch(BlockId site, const Value& cond, bool taken);

#ifndef RARETRIG_SRC_INTERP_HPP_
#define RARETRIG_SRC_INTERP_HPP_

#include <stdexcept>
#include <vector>

#include "raretrig/dut.hpp"
#include "raretrig/instrument.hpp"

namespace raretrig::detail {

template <typename Policy>
typename Policy::Value eval_expr(const Expr& e, Policy& pol,
                                 const std::vector<typename Policy::Value>& in,
                                 const std::vector<typename Policy::Value>& rg,
                                 const std::vector<typename Policy::Value>& lo,
                                 bool checks) {
  using V = typename Policy::Value;
  switch (e.kind) {
    case Expr::Kind::kConst:
      return pol.make_const(e.value, e.width);
    case Expr::Kind::kInputRef:
      return in[e.index];
    case Expr::Kind::kRegRef:
      return rg[e.index];
    case Expr::Kind::kLocalRef:
      return lo[e.index];
    case Expr::Kind::kUnary: {
      V a = eval_expr(e.args[0], pol, in, rg, lo, checks);
      V r = pol.apply_un(e.un, a, e.width);
      if (checks && pol.concrete(r) > width_mask(e.width))
        throw std::logic_error("width violation in unary op result");
      return r;
    }
    case Expr::Kind::kBinary: {
      V a = eval_expr(e.args[0], pol, in, rg, lo, checks);
      V b = eval_expr(e.args[1], pol, in, rg, lo, checks);
      V r = pol.apply_bin(e.bin, a, b, e.width, e.args[0].width);
      if (checks && pol.concrete(r) > width_mask(e.width))
        throw std::logic_error("width violation in binary op result");
      return r;
    }
  }
  throw std::logic_error("corrupt expression kind");
}

template <typename Policy>
Result<Trace, ExecError> run_interp(const Dut& dut, const TestCase& tc,
                                    const InstrumentationPlan& plan,
                                    Policy& pol) {
  using V = typename Policy::Value;
  Trace tr;

  const std::size_t fsz = dut.frame_bytes;
  std::uint64_t frames_avail;
  if (fsz == 0) {
    frames_avail = ~0ull;  // no inputs: frames are free
  } else {
    if (tc.bytes.size() % fsz != 0)
      return ExecError{ExecError::Kind::kPartialFrame, tc.bytes.size(), fsz,
                       "test case ends mid-frame"};
    frames_avail = tc.bytes.size() / fsz;
    if (frames_avail == 0)
      return ExecError{ExecError::Kind::kNoFrames, tc.bytes.size(), fsz,
                       "test case holds no complete frame"};
  }

  // Flat views; map iteration order == block_order (both sorted by id).
  std::vector<const BasicBlock*> blocks;
  blocks.reserve(dut.blocks.size());
  for (const auto& [id, blk] : dut.blocks) blocks.push_back(&blk);

  std::vector<V> regs;
  regs.reserve(dut.registers.size());
  for (const auto& r : dut.registers)
    regs.push_back(pol.make_const(r.init, r.width));

  std::vector<V> inputs(dut.inputs.size());
  std::vector<V> locals;

  const bool checks = width_checks_enabled();
  BlockId prev_instr = kEntryEdgeSource;

  for (std::uint32_t cycle = 0;; ++cycle) {
    if (cycle >= frames_avail) {
      tr.terminated_by = Trace::End::kInputExhausted;
      return tr;
    }
    if (cycle >= dut.max_cycles) {
      tr.terminated_by = Trace::End::kMaxCycles;
      return tr;
    }
    const std::size_t frame_base = std::size_t(cycle) * fsz;
    for (std::size_t i = 0; i < dut.inputs.size(); ++i) {
      const unsigned width = dut.inputs[i].width;
      const unsigned nb = (width + 7) / 8;
      const std::size_t off = frame_base + dut.input_byte_off[i];
      std::uint64_t v = 0;
      for (unsigned b = 0; b < nb; ++b)
        v |= std::uint64_t(tc.bytes[off + b]) << (8 * b);
      v &= width_mask(width);
      inputs[i] = pol.input_value(static_cast<std::uint32_t>(off), nb, width,
                                  v);
    }
    tr.cycles_run = cycle + 1;

    std::uint64_t steps_in_cycle = 0;
    std::uint32_t cur_ix = dut.entry_ix;
    bool next_cycle = false;
    while (!next_cycle) {
      const BasicBlock& blk = *blocks[cur_ix];
      if (plan.is_instrumented(blk.id)) {
        tr.edge_sequence.emplace_back(prev_instr, blk.id);
        prev_instr = blk.id;
      }
      locals.clear();
      // Budget check precedes the count: steps_run only ever counts steps
      // that actually executed.
      for (const auto& st : blk.stmts) {
        if (steps_in_cycle == dut.max_steps_per_cycle) {
          tr.terminated_by = Trace::End::kStepBudget;
          return tr;
        }
        ++steps_in_cycle;
        ++tr.steps_run;
        locals.push_back(eval_expr(st.rhs, pol, inputs, regs, locals, checks));
      }
      if (steps_in_cycle == dut.max_steps_per_cycle) {
        tr.terminated_by = Trace::End::kStepBudget;
        return tr;
      }
      ++steps_in_cycle;
      ++tr.steps_run;
      switch (blk.term.kind) {
        case Terminator::Kind::kGoto:
          cur_ix = blk.target_ix;
          break;
        case Terminator::Kind::kBranch: {
          const V& cond = locals[blk.term.cond_slot];
          const bool taken = pol.concrete(cond) != 0;
          tr.branch_events.emplace_back(blk.id, taken);
          pol.on_branch(blk.id, cond, taken);
          cur_ix = taken ? blk.then_ix : blk.else_ix;
          break;
        }
        case Terminator::Kind::kCycleEnd:
          // Latch sources are fully evaluated locals, so plain assignment
          // already gives simultaneous-update semantics.
          for (const auto& [reg_ix, slot] : blk.term.latches)
            regs[reg_ix] = locals[slot];
          next_cycle = true;
          break;
        case Terminator::Kind::kHalt:
          tr.outputs.clear();
          for (std::uint32_t slot : blk.term.output_slots)
            tr.outputs.push_back(pol.concrete(locals[slot]));
          tr.has_outputs = true;
          tr.terminated_by = Trace::End::kHalt;
          return tr;
      }
    }
  }
}

struct ConcretePolicy {
  using Value = std::uint64_t;
  Value make_const(std::uint64_t v, unsigned) const { return v; }
  Value input_value(std::uint32_t, unsigned, unsigned,
                    std::uint64_t concrete) const {
    return concrete;
  }
  Value apply_un(UnOp op, Value a, unsigned w) const {
    return eval_unop(op, a, w);
  }
  Value apply_bin(BinOp op, Value a, Value b, unsigned rw, unsigned) const {
    return eval_binop(op, a, b, rw);
  }
  std::uint64_t concrete(Value v) const { return v; }
  void on_branch(BlockId, Value, bool) const {}
};

}  // namespace raretrig::detail

#endif  // RARETRIG_SRC_INTERP_HPP_
