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

#include <sstream>
#include <string>

#include "raretrig/dut.hpp"

namespace raretrig {
namespace {

const char* binop_spelling(BinOp op) {
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

void render_const(std::ostringstream& os, std::uint64_t v, unsigned width) {
  // Small values read better in decimal; wide magic values in hex. The
  // explicit width suffix makes rendered text reparse without inference.
  if (v > 9) {
    os << "0x" << std::hex << v << std::dec;
  } else {
    os << v;
  }
  os << ":" << width;
}

// Fully parenthesized, so the renderer never has to reason about precedence
// and round-trips are structurally exact.
void render_expr(std::ostringstream& os, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kConst:
      render_const(os, e.value, e.width);
      break;
    case Expr::Kind::kInputRef:
    case Expr::Kind::kRegRef:
    case Expr::Kind::kLocalRef:
      os << e.name;
      break;
    case Expr::Kind::kUnary:
      os << (e.un == UnOp::kNot ? "~" : "-") << "(";
      render_expr(os, e.args[0]);
      os << ")";
      break;
    case Expr::Kind::kBinary:
      os << "(";
      render_expr(os, e.args[0]);
      os << " " << binop_spelling(e.bin) << " ";
      render_expr(os, e.args[1]);
      os << ")";
      break;
  }
}

}  // namespace

std::string render_dut(const Dut& dut) {
  std::ostringstream os;
  os << "dut " << dut.name << "\n";
  for (const auto& in : dut.inputs)
    os << "input " << in.name << " " << unsigned(in.width) << "\n";
  for (const auto& r : dut.registers)
    os << "reg " << r.name << " " << unsigned(r.width) << " init " << r.init
       << "\n";
  for (const auto& out : dut.outputs)
    os << "output " << out.name << " " << unsigned(out.width) << "\n";
  for (const auto& e : dut.declared_unreachable)
    os << "unreachable " << to_string(e) << "\n";

  for (const auto& [id, blk] : dut.blocks) {
    os << "block " << id << ":\n";
    for (const auto& st : blk.stmts) {
      os << "  " << st.local << " = ";
      render_expr(os, st.rhs);
      os << "\n";
    }
    const Terminator& t = blk.term;
    switch (t.kind) {
      case Terminator::Kind::kGoto:
        os << "  goto " << t.target << "\n";
        break;
      case Terminator::Kind::kBranch:
        os << "  br " << blk.stmts[t.cond_slot].local << " ? "
           << t.then_target << " : " << t.else_target << "\n";
        break;
      case Terminator::Kind::kCycleEnd: {
        os << "  cycle {";
        bool first = true;
        for (const auto& [reg_ix, slot] : t.latches) {
          if (!first) os << ", ";
          first = false;
          os << dut.registers[reg_ix].name << "=" << blk.stmts[slot].local;
        }
        os << "}\n";
        break;
      }
      case Terminator::Kind::kHalt: {
        os << "  halt {";
        for (std::size_t o = 0; o < t.output_slots.size(); ++o) {
          if (o) os << ", ";
          os << dut.outputs[o].name << "="
             << blk.stmts[t.output_slots[o]].local;
        }
        os << "}\n";
        break;
      }
    }
  }

  os << "entry " << dut.entry << "\n";
  os << "max_cycles " << dut.max_cycles << "\n";
  os << "max_steps " << dut.max_steps_per_cycle << "\n";
  return os.str();
}

}  // namespace raretrig
