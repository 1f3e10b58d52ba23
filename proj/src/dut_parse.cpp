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

// Parser for the line-oriented DUT text format.
//
//   dut <name>
//   input <name> <width>
//   reg <name> <width> init <value>
//   output <name> <width>
//   unreachable <block>.<then|else>
//   block <id>:
//     <local> = <expr>
//     goto <id> | br <local> ? <id> : <id> | cycle {r=l, ...} | halt {o=l, ...}
//   entry <id>
//   max_cycles <n>
//   max_steps <n>          (optional; interpreter step budget per cycle)
//
// Expressions use C-like precedence over unsigned bitvectors; constants take
// an optional ":width" suffix and otherwise infer their width from the other
// operand or the referenced declaration. "!x" is sugar for "x == 0".

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "raretrig/dut.hpp"

namespace raretrig {
namespace {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

struct Tok {
  enum class K {
    kIdent, kNum, kAssign, kLParen, kRParen, kLBrace, kRBrace,
    kComma, kColon, kQuestion, kDot,
    kBinOp,   // payload in `bin`
    kTilde, kBang, kMinus,  // unary candidates ('-' doubles as kSub)
    kEnd,
  };
  K k = K::kEnd;
  std::string text;
  std::uint64_t num = 0;
  BinOp bin = BinOp::kAdd;
  std::size_t col = 0;  // 1-based
};

struct LexFail {
  std::size_t col;
  std::string message;
};

Result<std::vector<Tok>, LexFail> lex_line(const std::string& s) {
  std::vector<Tok> out;
  std::size_t i = 0;
  auto push = [&](Tok::K k, std::size_t col, std::string text = {}) -> Tok& {
    out.push_back(Tok{k, std::move(text), 0, BinOp::kAdd, col});
    return out.back();
  };
  auto push_bin = [&](BinOp op, std::size_t col, std::size_t len) {
    Tok& t = push(Tok::K::kBinOp, col, s.substr(col - 1, len));
    t.bin = op;
  };
  while (i < s.size()) {
    char c = s[i];
    if (c == '#') break;  // comment to end of line
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t col = i + 1;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) ||
                              s[j] == '_'))
        ++j;
      push(Tok::K::kIdent, col, s.substr(i, j - i));
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      bool hex = false;
      if (c == '0' && j + 1 < s.size() && (s[j + 1] == 'x' || s[j + 1] == 'X')) {
        hex = true;
        j += 2;
        std::size_t digits = j;
        while (j < s.size() &&
               std::isxdigit(static_cast<unsigned char>(s[j])))
          ++j;
        if (j == digits) return LexFail{col, "hex constant without digits"};
      } else {
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])))
          ++j;
      }
      const std::string text = s.substr(i, j - i);
      std::uint64_t v = 0;
      const char* p = text.c_str() + (hex ? 2 : 0);
      const char* end = text.c_str() + text.size();
      for (; p != end; ++p) {
        std::uint64_t digit;
        char d = *p;
        if (d >= '0' && d <= '9') digit = static_cast<std::uint64_t>(d - '0');
        else digit = static_cast<std::uint64_t>(std::tolower(d) - 'a' + 10);
        std::uint64_t base = hex ? 16 : 10;
        if (v > (~0ull - digit) / base)
          return LexFail{col, "constant does not fit in 64 bits"};
        v = v * base + digit;
      }
      Tok& t = push(Tok::K::kNum, col, text);
      t.num = v;
      i = j;
      continue;
    }
    switch (c) {
      case '(': push(Tok::K::kLParen, col); ++i; break;
      case ')': push(Tok::K::kRParen, col); ++i; break;
      case '{': push(Tok::K::kLBrace, col); ++i; break;
      case '}': push(Tok::K::kRBrace, col); ++i; break;
      case ',': push(Tok::K::kComma, col); ++i; break;
      case ':': push(Tok::K::kColon, col); ++i; break;
      case '?': push(Tok::K::kQuestion, col); ++i; break;
      case '.': push(Tok::K::kDot, col); ++i; break;
      case '~': push(Tok::K::kTilde, col); ++i; break;
      case '+': push_bin(BinOp::kAdd, col, 1); ++i; break;
      case '*': push_bin(BinOp::kMul, col, 1); ++i; break;
      case '&': push_bin(BinOp::kAnd, col, 1); ++i; break;
      case '|': push_bin(BinOp::kOr, col, 1); ++i; break;
      case '^': push_bin(BinOp::kXor, col, 1); ++i; break;
      case '-': push(Tok::K::kMinus, col, "-"); ++i; break;
      case '=':
        if (i + 1 < s.size() && s[i + 1] == '=') {
          push_bin(BinOp::kEq, col, 2);
          i += 2;
        } else {
          push(Tok::K::kAssign, col, "=");
          ++i;
        }
        break;
      case '!':
        if (i + 1 < s.size() && s[i + 1] == '=') {
          push_bin(BinOp::kNe, col, 2);
          i += 2;
        } else {
          push(Tok::K::kBang, col, "!");
          ++i;
        }
        break;
      case '<':
        if (i + 1 < s.size() && s[i + 1] == '<') {
          push_bin(BinOp::kShl, col, 2);
          i += 2;
        } else if (i + 2 < s.size() && s[i + 1] == '=' && s[i + 2] == 'u') {
          push_bin(BinOp::kLeu, col, 3);
          i += 3;
        } else if (i + 1 < s.size() && s[i + 1] == 'u') {
          push_bin(BinOp::kLtu, col, 2);
          i += 2;
        } else {
          return LexFail{col, "expected <u, <=u or << after '<'"};
        }
        break;
      case '>':
        if (i + 1 < s.size() && s[i + 1] == '>') {
          push_bin(BinOp::kShr, col, 2);
          i += 2;
        } else if (i + 2 < s.size() && s[i + 1] == '=' && s[i + 2] == 'u') {
          push_bin(BinOp::kGeu, col, 3);
          i += 3;
        } else if (i + 1 < s.size() && s[i + 1] == 'u') {
          push_bin(BinOp::kGtu, col, 2);
          i += 2;
        } else {
          return LexFail{col, "expected >u, >=u or >> after '>'"};
        }
        break;
      default:
        return LexFail{col, std::string("unexpected character '") + c + "'"};
    }
  }
  push(Tok::K::kEnd, s.size() + 1);
  return out;
}

// ---------------------------------------------------------------------------
// Expression parsing (precedence climbing) and width resolution
// ---------------------------------------------------------------------------

// Lower index binds looser. Comparisons yield width 1.
int precedence_of(BinOp op) {
  switch (op) {
    case BinOp::kOr: return 0;
    case BinOp::kXor: return 1;
    case BinOp::kAnd: return 2;
    case BinOp::kEq:
    case BinOp::kNe: return 3;
    case BinOp::kLtu:
    case BinOp::kLeu:
    case BinOp::kGtu:
    case BinOp::kGeu: return 4;
    case BinOp::kShl:
    case BinOp::kShr: return 5;
    case BinOp::kAdd:
    case BinOp::kSub: return 6;
    case BinOp::kMul: return 7;
  }
  return 7;
}

struct ExprFail {
  std::size_t col;
  std::string category;
  std::string message;
};

// Width 0 marks an unsuffixed constant awaiting inference.
class ExprParser {
 public:
  ExprParser(const std::vector<Tok>& toks, std::size_t& pos)
      : toks_(toks), pos_(pos) {}

  Result<Expr, ExprFail> parse() { return parse_bin(0); }

 private:
  const Tok& peek() const { return toks_[pos_]; }
  const Tok& take() { return toks_[pos_++]; }

  Result<Expr, ExprFail> parse_bin(int min_prec) {
    auto lhs = parse_unary();
    if (!lhs.ok()) return lhs;
    Expr e = std::move(lhs).value();
    while (peek().k == Tok::K::kBinOp || peek().k == Tok::K::kMinus) {
      BinOp op = peek().k == Tok::K::kMinus ? BinOp::kSub : peek().bin;
      int prec = precedence_of(op);
      if (prec < min_prec) break;
      take();
      auto rhs = parse_bin(prec + 1);  // all ops left-associative
      if (!rhs.ok()) return rhs;
      Expr bin;
      bin.kind = Expr::Kind::kBinary;
      bin.bin = op;
      bin.args.push_back(std::move(e));
      bin.args.push_back(std::move(rhs).value());
      e = std::move(bin);
    }
    return e;
  }

  Result<Expr, ExprFail> parse_unary() {
    const Tok& t = peek();
    if (t.k == Tok::K::kTilde || t.k == Tok::K::kMinus ||
        t.k == Tok::K::kBang) {
      take();
      auto sub = parse_unary();
      if (!sub.ok()) return sub;
      if (t.k == Tok::K::kBang) {
        // !x  ==>  (x == 0); the zero inherits x's width at resolution.
        Expr zero;
        zero.kind = Expr::Kind::kConst;
        zero.width = 0;
        zero.value = 0;
        Expr e;
        e.kind = Expr::Kind::kBinary;
        e.bin = BinOp::kEq;
        e.args.push_back(std::move(sub).value());
        e.args.push_back(std::move(zero));
        return e;
      }
      Expr e;
      e.kind = Expr::Kind::kUnary;
      e.un = t.k == Tok::K::kTilde ? UnOp::kNot : UnOp::kNeg;
      e.args.push_back(std::move(sub).value());
      return e;
    }
    return parse_primary();
  }

  Result<Expr, ExprFail> parse_primary() {
    const Tok& t = take();
    switch (t.k) {
      case Tok::K::kLParen: {
        auto inner = parse_bin(0);
        if (!inner.ok()) return inner;
        if (peek().k != Tok::K::kRParen)
          return ExprFail{peek().col, "syntax", "expected ')'"};
        take();
        return inner;
      }
      case Tok::K::kNum: {
        Expr e;
        e.kind = Expr::Kind::kConst;
        e.value = t.num;
        e.width = 0;
        if (peek().k == Tok::K::kColon) {
          take();
          const Tok& w = take();
          if (w.k != Tok::K::kNum)
            return ExprFail{w.col, "syntax", "expected width after ':'"};
          if (w.num < 1 || w.num > 64)
            return ExprFail{w.col, "bad-width",
                            "width must be between 1 and 64"};
          e.width = static_cast<std::uint8_t>(w.num);
          if (e.value > width_mask(e.width))
            return ExprFail{t.col, "bad-constant",
                            "constant does not fit in declared width"};
        }
        return e;
      }
      case Tok::K::kIdent: {
        Expr e;
        e.kind = Expr::Kind::kLocalRef;  // refined during resolution
        e.name = t.text;
        return e;
      }
      default:
        return ExprFail{t.col, "syntax", "expected expression"};
    }
  }

  const std::vector<Tok>& toks_;
  std::size_t& pos_;
};

}  // namespace

namespace {

// ---------------------------------------------------------------------------
// File-level parser
// ---------------------------------------------------------------------------

struct PendingTarget {
  std::size_t line;
  std::size_t col;
  BlockId from;
  BlockId to;
};

struct PendingUnreachable {
  std::size_t line;
  std::size_t col;
  BranchEdge edge;
};

class DutParser {
 public:
  explicit DutParser(const std::string& text) : text_(text) {}

  Result<Dut, ParseError> run();

 private:
  using LineToks = std::vector<Tok>;

  Result<bool, ParseError> handle_line(const LineToks& t);
  Result<bool, ParseError> handle_block_body(const LineToks& t);
  Result<Expr, ParseError> parse_statement_expr(const LineToks& t,
                                                std::size_t& pos);
  Result<bool, ParseError> resolve_expr(Expr& e, std::size_t col,
                                        std::optional<unsigned> hint,
                                        bool* resolved);
  ParseError err(std::size_t col, std::string category,
                 std::string message) const {
    return ParseError{line_no_, col, std::move(category), std::move(message)};
  }
  Result<bool, ParseError> close_block();
  Result<bool, ParseError> finalize(Dut& out);

  const std::string& text_;
  std::size_t line_no_ = 0;

  Dut dut_;
  std::map<std::string, std::uint32_t> input_ix_, reg_ix_, output_ix_;
  std::optional<BasicBlock> cur_;
  std::map<std::string, std::uint32_t> cur_locals_;
  std::vector<std::uint8_t> cur_local_widths_;
  bool cur_terminated_ = false;
  std::size_t cur_open_line_ = 0;
  bool saw_dut_ = false, saw_entry_ = false, saw_max_cycles_ = false,
       saw_max_steps_ = false;
  std::vector<PendingTarget> pending_targets_;
  std::vector<PendingUnreachable> pending_unreachable_;
};

Result<bool, ParseError> DutParser::resolve_expr(Expr& e, std::size_t col,
                                                 std::optional<unsigned> hint,
                                                 bool* resolved) {
  switch (e.kind) {
    case Expr::Kind::kConst:
      if (e.width == 0) {
        if (!hint) {
          *resolved = false;
          return true;
        }
        e.width = static_cast<std::uint8_t>(*hint);
        if (e.value > width_mask(e.width))
          return err(col, "bad-constant",
                     "constant does not fit in inferred width " +
                         std::to_string(*hint));
      }
      *resolved = true;
      return true;
    case Expr::Kind::kLocalRef: {
      // Identifier: resolve against locals-so-far, then inputs, then regs.
      auto it = cur_locals_.find(e.name);
      if (it != cur_locals_.end()) {
        e.kind = Expr::Kind::kLocalRef;
        e.index = it->second;
        e.width = cur_local_widths_[it->second];
      } else if (auto in = input_ix_.find(e.name); in != input_ix_.end()) {
        e.kind = Expr::Kind::kInputRef;
        e.index = in->second;
        e.width = dut_.inputs[in->second].width;
      } else if (auto rg = reg_ix_.find(e.name); rg != reg_ix_.end()) {
        e.kind = Expr::Kind::kRegRef;
        e.index = rg->second;
        e.width = dut_.registers[rg->second].width;
      } else {
        return err(col, "unknown-name",
                   "'" + e.name + "' is not a local, input or register here");
      }
      *resolved = true;
      return true;
    }
    case Expr::Kind::kInputRef:
    case Expr::Kind::kRegRef:
      *resolved = true;
      return true;
    case Expr::Kind::kUnary: {
      auto r = resolve_expr(e.args[0], col, hint, resolved);
      if (!r.ok()) return r;
      if (*resolved) e.width = e.args[0].width;
      return true;
    }
    case Expr::Kind::kBinary: {
      // Comparisons pick their operand width independently of the caller.
      std::optional<unsigned> down =
          is_comparison(e.bin) ? std::nullopt : hint;
      bool ra = false, rb = false;
      auto r = resolve_expr(e.args[0], col, down, &ra);
      if (!r.ok()) return r;
      std::optional<unsigned> bh = ra ? std::optional<unsigned>(e.args[0].width)
                                      : down;
      r = resolve_expr(e.args[1], col, bh, &rb);
      if (!r.ok()) return r;
      if (!ra && rb) {
        r = resolve_expr(e.args[0], col,
                         std::optional<unsigned>(e.args[1].width), &ra);
        if (!r.ok()) return r;
      }
      if (!ra || !rb) {
        *resolved = false;
        return true;
      }
      if (e.args[0].width != e.args[1].width)
        return err(col, "width-mismatch",
                   "operand widths differ (" +
                       std::to_string(e.args[0].width) + " vs " +
                       std::to_string(e.args[1].width) + ")");
      e.width = is_comparison(e.bin) ? 1 : e.args[0].width;
      *resolved = true;
      return true;
    }
  }
  return err(col, "syntax", "malformed expression");
}

Result<Expr, ParseError> DutParser::parse_statement_expr(const LineToks& t,
                                                         std::size_t& pos) {
  const std::size_t expr_col = pos < t.size() ? t[pos].col : 1;
  ExprParser ep(t, pos);
  auto r = ep.parse();
  if (!r.ok()) {
    const auto& f = r.error();
    return err(f.col, f.category, f.message);
  }
  Expr e = std::move(r).value();
  bool resolved = false;
  auto res = resolve_expr(e, expr_col, std::nullopt, &resolved);
  if (!res.ok()) return res.error();
  if (!resolved)
    return err(expr_col, "bad-constant",
               "cannot infer constant width; add a :width suffix");
  return e;
}

Result<bool, ParseError> DutParser::close_block() {
  if (!cur_) return true;
  if (!cur_terminated_)
    return ParseError{cur_open_line_, 1, "syntax",
                      "block " + std::to_string(cur_->id) +
                          " has no terminator"};
  dut_.blocks.emplace(cur_->id, std::move(*cur_));
  cur_.reset();
  cur_locals_.clear();
  cur_local_widths_.clear();
  cur_terminated_ = false;
  return true;
}

Result<bool, ParseError> DutParser::handle_block_body(const LineToks& t) {
  const Tok& head = t[0];
  auto expect = [&](std::size_t i, Tok::K k,
                    const char* what) -> std::optional<ParseError> {
    if (i >= t.size() || t[i].k != k)
      return err(i < t.size() ? t[i].col : head.col, "syntax",
                 std::string("expected ") + what);
    return std::nullopt;
  };

  if (head.k == Tok::K::kIdent && head.text == "goto") {
    if (auto e = expect(1, Tok::K::kNum, "block id after goto")) return *e;
    if (auto e = expect(2, Tok::K::kEnd, "end of line")) return *e;
    cur_->term.kind = Terminator::Kind::kGoto;
    cur_->term.target = static_cast<BlockId>(t[1].num);
    pending_targets_.push_back(
        {line_no_, t[1].col, cur_->id, cur_->term.target});
    cur_terminated_ = true;
    return true;
  }
  if (head.k == Tok::K::kIdent && head.text == "br") {
    // br <local> ? <then> : <else>
    if (auto e = expect(1, Tok::K::kIdent, "condition local after br"))
      return *e;
    auto it = cur_locals_.find(t[1].text);
    if (it == cur_locals_.end())
      return err(t[1].col, "unknown-name",
                 "branch condition '" + t[1].text +
                     "' is not a local of this block");
    if (cur_local_widths_[it->second] != 1)
      return err(t[1].col, "width-mismatch",
                 "branch condition must have width 1");
    if (auto e = expect(2, Tok::K::kQuestion, "'?'")) return *e;
    if (auto e = expect(3, Tok::K::kNum, "then-target block id")) return *e;
    if (auto e = expect(4, Tok::K::kColon, "':'")) return *e;
    if (auto e = expect(5, Tok::K::kNum, "else-target block id")) return *e;
    if (auto e = expect(6, Tok::K::kEnd, "end of line")) return *e;
    cur_->term.kind = Terminator::Kind::kBranch;
    cur_->term.cond_slot = it->second;
    cur_->term.then_target = static_cast<BlockId>(t[3].num);
    cur_->term.else_target = static_cast<BlockId>(t[5].num);
    pending_targets_.push_back(
        {line_no_, t[3].col, cur_->id, cur_->term.then_target});
    pending_targets_.push_back(
        {line_no_, t[5].col, cur_->id, cur_->term.else_target});
    cur_terminated_ = true;
    return true;
  }
  if (head.k == Tok::K::kIdent &&
      (head.text == "cycle" || head.text == "halt")) {
    const bool is_cycle = head.text == "cycle";
    if (auto e = expect(1, Tok::K::kLBrace, "'{'")) return *e;
    std::size_t i = 2;
    std::map<std::string, std::pair<std::size_t, std::uint32_t>> assigns;
    if (i < t.size() && t[i].k == Tok::K::kRBrace) {
      ++i;  // empty assignment list
    } else {
      for (;;) {
        if (t[i].k != Tok::K::kIdent)
          return err(t[i].col, "syntax", "expected name in assignment list");
        const Tok& lhs = t[i];
        if (auto e = expect(i + 1, Tok::K::kAssign, "'='")) return *e;
        if (t[i + 2].k != Tok::K::kIdent)
          return err(t[i + 2].col, "syntax", "expected local name");
        auto lit = cur_locals_.find(t[i + 2].text);
        if (lit == cur_locals_.end())
          return err(t[i + 2].col, "unknown-name",
                     "'" + t[i + 2].text + "' is not a local of this block");
        if (assigns.count(lhs.text))
          return err(lhs.col, "duplicate-name",
                     "'" + lhs.text + "' assigned twice");
        assigns.emplace(lhs.text, std::make_pair(lhs.col, lit->second));
        i += 3;
        if (t[i].k == Tok::K::kComma) {
          ++i;
          continue;
        }
        if (t[i].k == Tok::K::kRBrace) {
          ++i;
          break;
        }
        return err(t[i].col, "syntax", "expected ',' or '}'");
      }
    }
    if (auto e = expect(i, Tok::K::kEnd, "end of line")) return *e;

    if (is_cycle) {
      cur_->term.kind = Terminator::Kind::kCycleEnd;
      for (std::size_t r = 0; r < dut_.registers.size(); ++r) {
        auto it = assigns.find(dut_.registers[r].name);
        if (it == assigns.end())
          return err(head.col, "register-not-updated",
                     "cycle must latch register '" + dut_.registers[r].name +
                         "'");
        std::uint32_t slot = it->second.second;
        if (cur_local_widths_[slot] != dut_.registers[r].width)
          return err(it->second.first, "width-mismatch",
                     "latch width differs from register '" +
                         dut_.registers[r].name + "'");
        cur_->term.latches.emplace_back(static_cast<std::uint32_t>(r), slot);
        assigns.erase(it);
      }
      if (!assigns.empty())
        return err(assigns.begin()->second.first, "unknown-name",
                   "'" + assigns.begin()->first + "' is not a register");
    } else {
      cur_->term.kind = Terminator::Kind::kHalt;
      for (std::size_t o = 0; o < dut_.outputs.size(); ++o) {
        auto it = assigns.find(dut_.outputs[o].name);
        if (it == assigns.end())
          return err(head.col, "register-not-updated",
                     "halt must drive output '" + dut_.outputs[o].name + "'");
        std::uint32_t slot = it->second.second;
        if (cur_local_widths_[slot] != dut_.outputs[o].width)
          return err(it->second.first, "width-mismatch",
                     "width differs from output '" + dut_.outputs[o].name +
                         "'");
        cur_->term.output_slots.push_back(slot);
        assigns.erase(it);
      }
      if (!assigns.empty())
        return err(assigns.begin()->second.first, "unknown-name",
                   "'" + assigns.begin()->first + "' is not an output");
    }
    cur_terminated_ = true;
    return true;
  }

  // Otherwise: local assignment "<name> = <expr>".
  if (head.k != Tok::K::kIdent)
    return err(head.col, "syntax", "expected statement or terminator");
  if (t.size() < 2 || t[1].k != Tok::K::kAssign)
    return err(t.size() > 1 ? t[1].col : head.col, "syntax",
               "expected '=' after local name");
  if (cur_locals_.count(head.text))
    return err(head.col, "duplicate-name",
               "local '" + head.text + "' already defined in this block");
  if (input_ix_.count(head.text) || reg_ix_.count(head.text) ||
      output_ix_.count(head.text))
    return err(head.col, "duplicate-name",
               "'" + head.text + "' shadows a declared name");
  std::size_t pos = 2;
  auto e = parse_statement_expr(t, pos);
  if (!e.ok()) return e.error();
  if (t[pos].k != Tok::K::kEnd)
    return err(t[pos].col, "syntax", "unexpected trailing tokens");
  std::uint32_t slot = static_cast<std::uint32_t>(cur_->stmts.size());
  cur_locals_.emplace(head.text, slot);
  cur_local_widths_.push_back(e.value().width);
  cur_->stmts.push_back(Statement{head.text, std::move(e).value()});
  return true;
}

Result<bool, ParseError> DutParser::handle_line(const LineToks& t) {
  const Tok& head = t[0];
  if (head.k == Tok::K::kEnd) return true;  // blank / comment-only line

  auto need_ident = [&](std::size_t i,
                        const char* what) -> std::optional<ParseError> {
    if (i >= t.size() || t[i].k != Tok::K::kIdent)
      return err(i < t.size() ? t[i].col : head.col, "syntax",
                 std::string("expected ") + what);
    return std::nullopt;
  };
  auto need_num = [&](std::size_t i,
                      const char* what) -> std::optional<ParseError> {
    if (i >= t.size() || t[i].k != Tok::K::kNum)
      return err(i < t.size() ? t[i].col : head.col, "syntax",
                 std::string("expected ") + what);
    return std::nullopt;
  };
  auto need_end = [&](std::size_t i) -> std::optional<ParseError> {
    if (i >= t.size() || t[i].k != Tok::K::kEnd)
      return err(i < t.size() ? t[i].col : head.col, "syntax",
                 "unexpected trailing tokens");
    return std::nullopt;
  };
  auto check_fresh_name = [&](const Tok& nm) -> std::optional<ParseError> {
    if (input_ix_.count(nm.text) || reg_ix_.count(nm.text) ||
        output_ix_.count(nm.text))
      return err(nm.col, "duplicate-name",
                 "'" + nm.text + "' already declared");
    return std::nullopt;
  };
  auto check_width = [&](const Tok& w) -> std::optional<ParseError> {
    if (w.num < 1 || w.num > 64)
      return err(w.col, "bad-width", "width must be between 1 and 64");
    return std::nullopt;
  };

  const std::string& kw = head.k == Tok::K::kIdent ? head.text : "";

  if (kw == "dut") {
    if (auto e = close_block(); !e.ok()) return e;
    if (auto e = need_ident(1, "design name")) return *e;
    if (auto e = need_end(2)) return *e;
    if (saw_dut_) return err(head.col, "duplicate-name", "second dut line");
    dut_.name = t[1].text;
    saw_dut_ = true;
    return true;
  }
  if (kw == "input" || kw == "output") {
    if (auto e = close_block(); !e.ok()) return e;
    if (auto e = need_ident(1, "port name")) return *e;
    if (auto e = need_num(2, "port width")) return *e;
    if (auto e = need_end(3)) return *e;
    if (auto e = check_fresh_name(t[1])) return *e;
    if (auto e = check_width(t[2])) return *e;
    Port p{t[1].text, static_cast<std::uint8_t>(t[2].num)};
    if (kw == "input") {
      input_ix_.emplace(p.name, dut_.inputs.size());
      dut_.inputs.push_back(std::move(p));
    } else {
      output_ix_.emplace(p.name, dut_.outputs.size());
      dut_.outputs.push_back(std::move(p));
    }
    return true;
  }
  if (kw == "reg") {
    if (auto e = close_block(); !e.ok()) return e;
    if (auto e = need_ident(1, "register name")) return *e;
    if (auto e = need_num(2, "register width")) return *e;
    if (auto e = need_ident(3, "'init'")) return *e;
    if (t[3].text != "init")
      return err(t[3].col, "syntax", "expected 'init'");
    if (auto e = need_num(4, "initial value")) return *e;
    if (auto e = need_end(5)) return *e;
    if (auto e = check_fresh_name(t[1])) return *e;
    if (auto e = check_width(t[2])) return *e;
    Register r{t[1].text, static_cast<std::uint8_t>(t[2].num), t[4].num};
    if (r.init > width_mask(r.width))
      return err(t[4].col, "bad-constant",
                 "initial value does not fit register width");
    reg_ix_.emplace(r.name, dut_.registers.size());
    dut_.registers.push_back(std::move(r));
    return true;
  }
  if (kw == "unreachable") {
    if (auto e = close_block(); !e.ok()) return e;
    // unreachable <block>.<then|else>
    if (auto e = need_num(1, "branch block id")) return *e;
    if (t.size() < 3 || t[2].k != Tok::K::kDot)
      return err(t[1].col, "syntax", "expected '<block>.<then|else>'");
    if (auto e = need_ident(3, "'then' or 'else'")) return *e;
    Arm arm;
    if (t[3].text == "then") arm = Arm::kThen;
    else if (t[3].text == "else") arm = Arm::kElse;
    else return err(t[3].col, "syntax", "expected 'then' or 'else'");
    if (auto e = need_end(4)) return *e;
    pending_unreachable_.push_back(
        {line_no_, t[1].col,
         BranchEdge{static_cast<BlockId>(t[1].num), arm}});
    return true;
  }
  if (kw == "block") {
    if (auto e = close_block(); !e.ok()) return e;
    if (auto e = need_num(1, "block id")) return *e;
    if (t.size() < 3 || t[2].k != Tok::K::kColon)
      return err(t[1].col, "syntax", "expected ':' after block id");
    if (auto e = need_end(3)) return *e;
    BlockId id = static_cast<BlockId>(t[1].num);
    if (t[1].num > 0xfffffffeull)
      return err(t[1].col, "bad-constant", "block id out of range");
    if (dut_.blocks.count(id))
      return err(t[1].col, "duplicate-name",
                 "block " + std::to_string(id) + " already defined");
    cur_.emplace();
    cur_->id = id;
    cur_open_line_ = line_no_;
    cur_terminated_ = false;
    return true;
  }
  if (kw == "entry") {
    if (auto e = close_block(); !e.ok()) return e;
    if (auto e = need_num(1, "entry block id")) return *e;
    if (auto e = need_end(2)) return *e;
    if (saw_entry_)
      return err(head.col, "duplicate-name", "second entry line");
    dut_.entry = static_cast<BlockId>(t[1].num);
    saw_entry_ = true;
    return true;
  }
  if (kw == "max_cycles" || kw == "max_steps") {
    if (auto e = close_block(); !e.ok()) return e;
    if (auto e = need_num(1, "count")) return *e;
    if (auto e = need_end(2)) return *e;
    if (t[1].num == 0)
      return err(t[1].col, "bad-constant", kw + " must be at least 1");
    if (kw == "max_cycles") {
      if (saw_max_cycles_)
        return err(head.col, "duplicate-name", "second max_cycles line");
      if (t[1].num > 0xffffffffull)
        return err(t[1].col, "bad-constant", "max_cycles out of range");
      dut_.max_cycles = static_cast<std::uint32_t>(t[1].num);
      saw_max_cycles_ = true;
    } else {
      if (saw_max_steps_)
        return err(head.col, "duplicate-name", "second max_steps line");
      dut_.max_steps_per_cycle = t[1].num;
      saw_max_steps_ = true;
    }
    return true;
  }

  if (cur_) return handle_block_body(t);
  return err(head.col, "syntax",
             "statement outside of a block (missing 'block <id>:'?)");
}

Result<bool, ParseError> DutParser::finalize(Dut& out) {
  if (!saw_dut_)
    return ParseError{1, 1, "syntax", "missing 'dut <name>' line"};
  if (!saw_entry_)
    return ParseError{line_no_, 1, "syntax", "missing 'entry' line"};
  if (dut_.blocks.empty())
    return ParseError{line_no_, 1, "syntax", "design has no blocks"};
  if (!dut_.blocks.count(dut_.entry))
    return ParseError{line_no_, 1, "dangling-target",
                      "entry block " + std::to_string(dut_.entry) +
                          " is not defined"};
  for (const auto& pt : pending_targets_) {
    if (!dut_.blocks.count(pt.to))
      return ParseError{pt.line, pt.col, "dangling-target",
                        "block " + std::to_string(pt.from) +
                            " targets undefined block " +
                            std::to_string(pt.to)};
  }
  for (const auto& pu : pending_unreachable_) {
    auto it = dut_.blocks.find(pu.edge.site);
    if (it == dut_.blocks.end() ||
        it->second.term.kind != Terminator::Kind::kBranch)
      return ParseError{pu.line, pu.col, "dangling-target",
                        "unreachable declaration does not name a branch"};
    dut_.declared_unreachable.insert(pu.edge);
  }

  // Derived execution plumbing.
  dut_.block_order.clear();
  std::map<BlockId, std::uint32_t> ix;
  for (const auto& [id, blk] : dut_.blocks) {
    ix.emplace(id, static_cast<std::uint32_t>(dut_.block_order.size()));
    dut_.block_order.push_back(id);
  }
  dut_.entry_ix = ix.at(dut_.entry);
  for (auto& [id, blk] : dut_.blocks) {
    switch (blk.term.kind) {
      case Terminator::Kind::kGoto:
        blk.target_ix = ix.at(blk.term.target);
        break;
      case Terminator::Kind::kBranch:
        blk.then_ix = ix.at(blk.term.then_target);
        blk.else_ix = ix.at(blk.term.else_target);
        break;
      default:
        break;
    }
  }
  dut_.input_byte_off.clear();
  std::uint32_t off = 0;
  for (const auto& in : dut_.inputs) {
    dut_.input_byte_off.push_back(off);
    off += (in.width + 7) / 8;
  }
  dut_.frame_bytes = off;

  out = std::move(dut_);
  return true;
}

Result<Dut, ParseError> DutParser::run() {
  std::size_t start = 0;
  line_no_ = 0;
  while (start <= text_.size()) {
    std::size_t nl = text_.find('\n', start);
    std::string line = nl == std::string::npos
                           ? text_.substr(start)
                           : text_.substr(start, nl - start);
    ++line_no_;
    auto toks = lex_line(line);
    if (!toks.ok())
      return ParseError{line_no_, toks.error().col, "syntax",
                        toks.error().message};
    auto h = handle_line(toks.value());
    if (!h.ok()) return h.error();
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
  if (auto e = close_block(); !e.ok()) return e.error();
  Dut out;
  auto f = finalize(out);
  if (!f.ok()) return f.error();
  return out;
}

}  // namespace

Result<Dut, ParseError> parse_dut(const std::string& text) {
  return DutParser(text).run();
}

std::string to_string(const BranchEdge& e) {
  return std::to_string(e.site) + (e.arm == Arm::kThen ? ".then" : ".else");
}

const char* origin_tag(TestCase::Origin origin) {
  switch (origin) {
    case TestCase::Origin::kRandom: return "random";
    case TestCase::Origin::kFuzz: return "fuzz";
    case TestCase::Origin::kConcolic: return "concolic";
    case TestCase::Origin::kUser: return "user";
  }
  return "user";
}

Result<TestCase::Origin, std::string> origin_from_tag(const std::string& tag) {
  if (tag == "random") return TestCase::Origin::kRandom;
  if (tag == "fuzz") return TestCase::Origin::kFuzz;
  if (tag == "concolic") return TestCase::Origin::kConcolic;
  if (tag == "user") return TestCase::Origin::kUser;
  return std::string("unknown origin tag: " + tag);
}

const char* end_tag(Trace::End end) {
  switch (end) {
    case Trace::End::kHalt: return "halt";
    case Trace::End::kInputExhausted: return "input_exhausted";
    case Trace::End::kMaxCycles: return "max_cycles";
    case Trace::End::kStepBudget: return "step_budget";
  }
  return "halt";
}

}  // namespace raretrig
