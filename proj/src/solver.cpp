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

// Bitvector constraint solving in three tiers.
//
// Tier 1 decomposes each predicate against constants, accumulating bit-level
// pins per input byte. Derivation steps come in two strengths:
//   * hard  - equivalence-preserving inversions (xor/add/sub against a
//             constant, not/neg, shift windows, and-masks, disjoint-mask
//             splits of or/add/xor). Two contradictory hard pins prove the
//             system unsatisfiable.
//   * soft  - witness picks (comparisons, disequalities), disjunct choices
//             and concretized operands. Conflicts that involve a soft pin
//             only mean "this road failed", never unsatisfiability.
// Tier 2 enumerates every assignment when the referenced bytes carry at most
// 24 bits, so its UNSAT answers are exhaustive proofs. Tier 3 is a seeded
// hill climb over a per-constraint distance; it can only answer SAT or
// UNKNOWN. Every SAT from any tier is verified by substitution before it
// leaves this file.

#include <bit>

#include "raretrig/concolic.hpp"
#include "raretrig/rng.hpp"
#include "symprog.hpp"

namespace raretrig {
namespace {

enum class Out : std::uint8_t { kOk, kUnsat, kGiveUp };

// One byte of accumulated knowledge. `value` is normalized to `care`
// (bits outside care are zero); `hard` marks the subset of care that was
// derived by equivalence-preserving steps only.
struct Pin {
  std::uint8_t care = 0;
  std::uint8_t value = 0;
  std::uint8_t hard = 0;
};

struct Ctx {
  std::map<std::uint32_t, Pin> pins;
  // Any witness, choice or residual check happened; SAT then rests solely
  // on the final substitution test.
  bool soft_used = false;
};

std::uint64_t inv_odd(std::uint64_t c) {
  // Newton iteration doubles the valid bits each round; 6 rounds cover 64.
  std::uint64_t x = c;
  for (int i = 0; i < 6; ++i) x *= 2 - c * x;
  return x;
}

class Tier1 {
 public:
  Out constrain(const SymExprPtr& pred, bool required, Ctx& ctx) {
    return require_bits(pred, 1, required ? 1 : 0, ctx);
  }

 private:
  // Over-approximation of the bits an expression can set.
  std::uint64_t pb(const SymExprPtr& e) {
    auto it = pb_.find(e.get());
    if (it != pb_.end()) return it->second;
    const std::uint64_t m = width_mask(e->width);
    std::uint64_t r = m;
    switch (e->kind) {
      case SymExpr::Kind::kConst:
        r = e->value & m;
        break;
      case SymExpr::Kind::kByte:
        r = m & 0xff;
        break;
      case SymExpr::Kind::kUnary:
        break;  // not/neg can produce anything
      case SymExpr::Kind::kBinary: {
        if (is_comparison(e->bin)) {
          r = 1;
          break;
        }
        const std::uint64_t pa = pb(e->a), pbb = pb(e->b);
        switch (e->bin) {
          case BinOp::kAnd:
            r = pa & pbb;
            break;
          case BinOp::kOr:
          case BinOp::kXor:
            r = (pa | pbb) & m;
            break;
          case BinOp::kAdd: {
            const unsigned hb =
                static_cast<unsigned>(std::bit_width(pa | pbb));
            r = hb >= 64 ? m : (width_mask(std::min<unsigned>(e->width,
                                                              hb + 1)));
            break;
          }
          case BinOp::kMul: {
            if (pa == 0 || pbb == 0) {
              r = 0;
              break;
            }
            const unsigned s = static_cast<unsigned>(std::bit_width(pa)) +
                               static_cast<unsigned>(std::bit_width(pbb));
            r = width_mask(std::min<unsigned>(e->width, s));
            break;
          }
          case BinOp::kSub:
            r = (pa == 0 && pbb == 0) ? 0 : m;  // wraparound
            break;
          case BinOp::kShl:
            if (e->b->kind == SymExpr::Kind::kConst) {
              const std::uint64_t sh = e->b->value;
              r = sh >= e->width ? 0 : (pa << sh) & m;
            }
            break;
          case BinOp::kShr:
            if (e->b->kind == SymExpr::Kind::kConst) {
              const std::uint64_t sh = e->b->value;
              r = sh >= e->width ? 0 : pa >> sh;
            }
            break;
          default:
            break;
        }
        break;
      }
    }
    pb_.emplace(e.get(), r);
    return r;
  }

  // Current value of an expression under the pins, zeros elsewhere.
  std::uint64_t eval_cur(const SymExprPtr& e, const Ctx& ctx) {
    std::map<std::uint32_t, std::uint8_t> m;
    for (const auto& [off, p] : ctx.pins) m.emplace(off, p.value);
    return sym_eval(*e, m);
  }

  static Out add_pin(Ctx& ctx, std::uint32_t off, std::uint8_t care,
                     std::uint8_t val, bool hard) {
    if (!care) return Out::kOk;
    val &= care;
    Pin& p = ctx.pins[off];
    const std::uint8_t overlap = p.care & care;
    const std::uint8_t conflict =
        static_cast<std::uint8_t>((p.value ^ val) & overlap);
    if (conflict) {
      // Both derivations exact: the constraints themselves disagree.
      if (hard && (conflict & p.hard)) return Out::kUnsat;
      return Out::kGiveUp;
    }
    p.value |= static_cast<std::uint8_t>(val & ~p.care);
    p.care |= care;
    if (hard)
      p.hard |= care;
    else
      ctx.soft_used = true;
    return Out::kOk;
  }

  // Runs `fn` on a copy of the context; adopts the copy on success with all
  // newly derived hardness stripped, because the result depends on the
  // choice. `degrade_unsat` turns the copy's UNSAT into "didn't work":
  // required for guessed values, not for exhaustive disjunct splits.
  template <typename Fn>
  Out trial(Ctx& ctx, bool degrade_unsat, Fn&& fn) {
    Ctx t = ctx;
    const Out o = fn(t);
    if (o == Out::kOk) {
      for (auto& [off, p] : t.pins) {
        auto it = ctx.pins.find(off);
        p.hard = it == ctx.pins.end()
                     ? 0
                     : static_cast<std::uint8_t>(p.hard & it->second.hard);
      }
      t.soft_used = true;
      ctx = std::move(t);
      return Out::kOk;
    }
    if (degrade_unsat && o == Out::kUnsat) return Out::kGiveUp;
    return o;
  }

  // Core: require (e & care) == (val & care).
  Out require_bits(const SymExprPtr& e, std::uint64_t care, std::uint64_t val,
                   Ctx& ctx) {
    const std::uint64_t m = width_mask(e->width);
    care &= m;
    val &= m;
    // Bits the expression can never set satisfy a 0-requirement for free
    // and refute a 1-requirement outright.
    const std::uint64_t possible = pb(e);
    if (val & care & ~possible) return Out::kUnsat;
    care &= possible;
    if (!care) return Out::kOk;

    switch (e->kind) {
      case SymExpr::Kind::kConst:
        return ((e->value ^ val) & care) == 0 ? Out::kOk : Out::kUnsat;
      case SymExpr::Kind::kByte:
        return add_pin(ctx, e->byte_offset, static_cast<std::uint8_t>(care),
                       static_cast<std::uint8_t>(val), true);
      case SymExpr::Kind::kUnary:
        if (e->un == UnOp::kNot)
          return require_bits(e->a, care, ~val & m, ctx);
        // Negation is a bijection but not bitwise-local.
        if (care == m) return require_bits(e->a, m, (0 - val) & m, ctx);
        return Out::kGiveUp;
      case SymExpr::Kind::kBinary:
        return require_binary(e, care, val, ctx);
    }
    return Out::kGiveUp;
  }

  Out require_binary(const SymExprPtr& e, std::uint64_t care,
                     std::uint64_t val, Ctx& ctx) {
    if (is_comparison(e->bin)) return require_cmp(e, val, ctx);

    const SymExprPtr& A = e->a;
    const SymExprPtr& B = e->b;
    const std::uint64_t m = width_mask(e->width);
    const bool ac = A->kind == SymExpr::Kind::kConst;
    const bool bc = B->kind == SymExpr::Kind::kConst;

    switch (e->bin) {
      case BinOp::kXor:
        if (bc) return require_bits(A, care, val ^ B->value, ctx);
        if (ac) return require_bits(B, care, val ^ A->value, ctx);
        return split_xor(e, care, val, ctx);
      case BinOp::kAnd:
        if (ac || bc) {
          // pb(e) is inside the mask, so surviving care bits all fall
          // under it; the masked operand must match there directly.
          return require_bits(bc ? A : B, care, val, ctx);
        }
        return require_and(e, care, val, ctx);
      case BinOp::kOr:
        if (ac || bc) {
          const std::uint64_t c = bc ? B->value : A->value;
          const std::uint64_t forced = care & c;  // these bits read 1
          if (~val & forced) return Out::kUnsat;
          return require_bits(bc ? A : B, care & ~c, val, ctx);
        }
        return split_orlike(e, care, val, ctx);
      case BinOp::kAdd:
        if (bc && care == m) return require_bits(A, m, (val - B->value) & m,
                                                 ctx);
        if (ac && care == m) return require_bits(B, m, (val - A->value) & m,
                                                 ctx);
        if (!ac && !bc && (pb(A) & pb(B)) == 0)
          return split_orlike(e, care, val, ctx);
        break;
      case BinOp::kSub:
        if (bc && care == m) return require_bits(A, m, (val + B->value) & m,
                                                 ctx);
        if (ac && care == m) return require_bits(B, m, (A->value - val) & m,
                                                 ctx);
        break;
      case BinOp::kMul:
        if ((ac || bc) && care == m) {
          const std::uint64_t c = bc ? B->value : A->value;
          if (c & 1)
            return require_bits(bc ? A : B, m, (val * inv_odd(c)) & m, ctx);
        }
        break;
      case BinOp::kShl:
        if (bc) {
          const std::uint64_t sh = B->value;
          if (sh >= e->width) return Out::kGiveUp;  // pb filter handles 0s
          // The low `sh` result bits are structurally zero (already
          // filtered); the rest windows onto A's low bits.
          return require_bits(A, care >> sh, val >> sh, ctx);
        }
        break;
      case BinOp::kShr:
        if (bc) {
          const std::uint64_t sh = B->value;
          if (sh >= e->width) return Out::kGiveUp;
          return require_bits(A, (care << sh) & m, (val << sh) & m, ctx);
        }
        break;
      default:
        break;
    }
    return concretize(e, care, val, ctx);
  }

  // (a | b) or carry-free (a + b): per-bit, a 0-result forces both sides to
  // 0 and a 1-result pins whichever side can actually produce it.
  Out split_orlike(const SymExprPtr& e, std::uint64_t care, std::uint64_t val,
                   Ctx& ctx) {
    const std::uint64_t pa = pb(e->a), pbb = pb(e->b);
    const std::uint64_t zeros = care & ~val;
    const std::uint64_t ones = care & val;
    if (ones & ~(pa | pbb)) return Out::kUnsat;

    Out o = require_bits(e->a, zeros & pa, 0, ctx);
    if (o != Out::kOk) return o;
    o = require_bits(e->b, zeros & pbb, 0, ctx);
    if (o != Out::kOk) return o;

    o = require_bits(e->a, ones & pa & ~pbb, ~0ull, ctx);
    if (o != Out::kOk) return o;
    o = require_bits(e->b, ones & pbb & ~pa, ~0ull, ctx);
    if (o != Out::kOk) return o;

    const std::uint64_t amb = ones & pa & pbb;
    if (amb == 0) return Out::kOk;
    if (amb == 1 && e->width == 1) {
      // Boolean disjunction: the two trials are exhaustive, so two exact
      // refutations add up to one.
      const Out oa =
          trial(ctx, false, [&](Ctx& t) { return require_bits(e->a, 1, 1, t); });
      if (oa == Out::kOk) return Out::kOk;
      const Out ob =
          trial(ctx, false, [&](Ctx& t) { return require_bits(e->b, 1, 1, t); });
      if (ob == Out::kOk) return Out::kOk;
      return (oa == Out::kUnsat && ob == Out::kUnsat) ? Out::kUnsat
                                                      : Out::kGiveUp;
    }
    return Out::kGiveUp;
  }

  Out split_xor(const SymExprPtr& e, std::uint64_t care, std::uint64_t val,
                Ctx& ctx) {
    const std::uint64_t pa = pb(e->a), pbb = pb(e->b);
    const std::uint64_t only_a = care & ~pbb;
    const std::uint64_t only_b = care & ~pa;
    const std::uint64_t both = care & pa & pbb;
    if (both == 0) {
      Out o = require_bits(e->a, only_a, val, ctx);
      if (o != Out::kOk) return o;
      return require_bits(e->b, only_b, val, ctx);
    }
    if (both == 1 && care == 1 && e->width == 1) {
      const bool t = (val & 1) != 0;
      // (a, b) pairs that produce the wanted parity.
      const std::uint64_t pairs[2][2] = {{t ? 1u : 0u, 0u},
                                         {t ? 0u : 1u, 1u}};
      for (const auto& pr : pairs) {
        const Out o = trial(ctx, true, [&](Ctx& tc) {
          Out x = require_bits(e->a, 1, pr[0], tc);
          if (x != Out::kOk) return x;
          return require_bits(e->b, 1, pr[1], tc);
        });
        if (o == Out::kOk) return Out::kOk;
      }
      return Out::kGiveUp;
    }
    return concretize(e, care, val, ctx);
  }

  Out require_and(const SymExprPtr& e, std::uint64_t care, std::uint64_t val,
                  Ctx& ctx) {
    const std::uint64_t ones = care & val;  // need both sides 1
    Out o = require_bits(e->a, ones, ~0ull, ctx);
    if (o != Out::kOk) return o;
    o = require_bits(e->b, ones, ~0ull, ctx);
    if (o != Out::kOk) return o;
    const std::uint64_t zeros = care & ~val;  // need at least one side 0
    if (zeros == 0) return Out::kOk;
    if (zeros == 1 && e->width == 1) {
      const Out oa =
          trial(ctx, false, [&](Ctx& t) { return require_bits(e->a, 1, 0, t); });
      if (oa == Out::kOk) return Out::kOk;
      const Out ob =
          trial(ctx, false, [&](Ctx& t) { return require_bits(e->b, 1, 0, t); });
      if (ob == Out::kOk) return Out::kOk;
      return (oa == Out::kUnsat && ob == Out::kUnsat) ? Out::kUnsat
                                                      : Out::kGiveUp;
    }
    return Out::kGiveUp;
  }

  // Last resort for two symbolic operands: freeze one at its current value
  // (and pin it there), invert the other. Pure guesswork, hence a trial.
  Out concretize(const SymExprPtr& e, std::uint64_t care, std::uint64_t val,
                 Ctx& ctx) {
    if (e->kind != SymExpr::Kind::kBinary || is_comparison(e->bin))
      return Out::kGiveUp;
    const std::uint64_t m = width_mask(e->width);
    if (care != m) return Out::kGiveUp;

    for (int side = 0; side < 2; ++side) {
      const SymExprPtr& fixed = side == 0 ? e->b : e->a;
      const SymExprPtr& open = side == 0 ? e->a : e->b;
      const Out o = trial(ctx, true, [&](Ctx& t) {
        const std::uint64_t fv = eval_cur(fixed, t) & m;
        std::uint64_t want = 0;
        switch (e->bin) {
          case BinOp::kAdd:
            want = (val - fv) & m;
            break;
          case BinOp::kXor:
            want = (val ^ fv) & m;
            break;
          case BinOp::kSub:
            // a - b == val; solving for a needs val + b, for b needs
            // a - val.
            want = side == 0 ? (val + fv) & m : (fv - val) & m;
            break;
          case BinOp::kMul:
            if (!(fv & 1)) return Out::kGiveUp;
            want = (val * inv_odd(fv)) & m;
            break;
          case BinOp::kOr:
            if (fv & ~val) return Out::kGiveUp;
            want = val & ~fv;
            break;
          case BinOp::kAnd:
            if (val & ~fv) return Out::kGiveUp;
            want = val;
            break;
          default:
            return Out::kGiveUp;
        }
        Out x = require_bits(fixed, width_mask(fixed->width), fv, t);
        if (x != Out::kOk) return x;
        return require_bits(open, width_mask(open->width), want, t);
      });
      if (o == Out::kOk) return Out::kOk;
    }
    return Out::kGiveUp;
  }

  Out require_cmp(const SymExprPtr& e, std::uint64_t val, Ctx& ctx) {
    bool t = (val & 1) != 0;
    SymExprPtr a = e->a, b = e->b;
    switch (e->bin) {
      case BinOp::kNe:
        t = !t;
        [[fallthrough]];
      case BinOp::kEq:
        return req_eq(a, b, t, ctx);
      case BinOp::kGtu:
        std::swap(a, b);
        break;
      case BinOp::kLeu:
        std::swap(a, b);
        t = !t;
        break;
      case BinOp::kGeu:
        t = !t;
        break;
      case BinOp::kLtu:
        break;
      default:
        return Out::kGiveUp;
    }
    return req_ltu(a, b, t, ctx);
  }

  Out pin_witness(const SymExprPtr& a, std::uint64_t cand, Ctx& ctx) {
    return trial(ctx, true, [&](Ctx& t) {
      return require_bits(a, width_mask(a->width), cand, t);
    });
  }

  Out req_eq(SymExprPtr a, SymExprPtr b, bool t, Ctx& ctx) {
    if (a->kind == SymExpr::Kind::kConst && b->kind != SymExpr::Kind::kConst)
      std::swap(a, b);
    const std::uint64_t m = width_mask(a->width);
    if (b->kind == SymExpr::Kind::kConst) {
      const std::uint64_t c = b->value;
      if (t) return require_bits(a, m, c, ctx);  // exact inversion chain
      const std::uint64_t cur = eval_cur(a, ctx) & m;
      if (cur != c) {
        ctx.soft_used = true;  // holds under today's pins; re-verified later
        return Out::kOk;
      }
      for (std::uint64_t cand :
           {(c + 1) & m, (c - 1) & m, std::uint64_t(0), m}) {
        if (cand == c) continue;
        if (pin_witness(a, cand, ctx) == Out::kOk) return Out::kOk;
      }
      return Out::kGiveUp;
    }
    // Two symbolic sides.
    if (!t) {
      const std::uint64_t va = eval_cur(a, ctx) & m;
      const std::uint64_t vb = eval_cur(b, ctx) & m;
      if (va != vb) {
        ctx.soft_used = true;
        return Out::kOk;
      }
    }
    // Freeze one side, chase the other.
    for (int side = 0; side < 2; ++side) {
      const SymExprPtr& fixed = side == 0 ? b : a;
      const SymExprPtr& open = side == 0 ? a : b;
      const Out o = trial(ctx, true, [&](Ctx& tc) {
        const std::uint64_t fv = eval_cur(fixed, tc) & m;
        const std::uint64_t want = t ? fv : (fv + 1) & m;
        Out x = require_bits(fixed, m, fv, tc);
        if (x != Out::kOk) return x;
        return require_bits(open, m, want, tc);
      });
      if (o == Out::kOk) return Out::kOk;
    }
    return Out::kGiveUp;
  }

  Out req_ltu(SymExprPtr a, SymExprPtr b, bool t, Ctx& ctx) {
    const std::uint64_t m = width_mask(a->width);
    if (b->kind == SymExpr::Kind::kConst) {
      const std::uint64_t c = b->value;
      if (t) {
        if (c == 0) return Out::kUnsat;  // nothing is below zero unsigned
        const std::uint64_t cur = eval_cur(a, ctx) & m;
        if (cur < c) {
          ctx.soft_used = true;
          return Out::kOk;
        }
        for (std::uint64_t cand : {c - 1, std::uint64_t(0)})
          if (pin_witness(a, cand, ctx) == Out::kOk) return Out::kOk;
        return Out::kGiveUp;
      }
      if (c == 0) return Out::kOk;  // a >= 0 always holds
      const std::uint64_t cur = eval_cur(a, ctx) & m;
      if (cur >= c) {
        ctx.soft_used = true;
        return Out::kOk;
      }
      for (std::uint64_t cand : {c, m})
        if (pin_witness(a, cand, ctx) == Out::kOk) return Out::kOk;
      return Out::kGiveUp;
    }
    if (a->kind == SymExpr::Kind::kConst) {
      const std::uint64_t c = a->value;
      if (t) {
        if (c == m) return Out::kUnsat;  // nothing is above the all-ones
        const std::uint64_t cur = eval_cur(b, ctx) & m;
        if (cur > c) {
          ctx.soft_used = true;
          return Out::kOk;
        }
        for (std::uint64_t cand : {c + 1, m})
          if (pin_witness(b, cand, ctx) == Out::kOk) return Out::kOk;
        return Out::kGiveUp;
      }
      if (c == m) return Out::kOk;  // b <= all-ones always holds
      const std::uint64_t cur = eval_cur(b, ctx) & m;
      if (cur <= c) {
        ctx.soft_used = true;
        return Out::kOk;
      }
      for (std::uint64_t cand : {c, std::uint64_t(0)})
        if (pin_witness(b, cand, ctx) == Out::kOk) return Out::kOk;
      return Out::kGiveUp;
    }
    // Two symbolic sides: freeze the right side, recurse into the constant
    // case; then the mirror.
    for (int side = 0; side < 2; ++side) {
      const Out o = trial(ctx, true, [&](Ctx& tc) {
        const SymExprPtr& fixed = side == 0 ? b : a;
        const std::uint64_t fv = eval_cur(fixed, tc) & m;
        Out x = require_bits(fixed, m, fv, tc);
        if (x != Out::kOk) return x;
        const SymExprPtr fc = sym_const(fv, a->width);
        return side == 0 ? req_ltu(a, fc, t, tc) : req_ltu(fc, b, t, tc);
      });
      if (o == Out::kOk) return Out::kOk;
    }
    return Out::kGiveUp;
  }

  std::map<const SymExpr*, std::uint64_t> pb_;
};

// ---------------------------------------------------------------------------
// Tier 3 distance
// ---------------------------------------------------------------------------

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t s = a + b;
  return s < a ? ~0ull : s;
}

// How far the predicate is from evaluating to `want`, given node values.
// Comparisons and the boolean connectives get a gradient; everything else
// is a 0/1 cliff.
std::uint64_t expr_err(const SymExpr* e, bool want,
                       const detail::SymProg& prog,
                       const std::vector<std::uint64_t>& v) {
  const std::uint64_t self = v[prog.index.at(e)];
  const bool truth = (self & 1) != 0;
  if (e->kind == SymExpr::Kind::kUnary && e->un == UnOp::kNot &&
      e->width == 1)
    return expr_err(e->a.get(), !want, prog, v);
  if (e->kind != SymExpr::Kind::kBinary) return truth == want ? 0 : 1;

  const std::uint64_t va = v[prog.index.at(e->a.get())];
  const std::uint64_t vb = v[prog.index.at(e->b.get())];
  auto lt_err = [](std::uint64_t x, std::uint64_t y, bool wantlt) {
    if (wantlt) return x < y ? 0 : x - y + 1;
    return x >= y ? 0 : y - x;
  };
  switch (e->bin) {
    case BinOp::kEq:
      if (want) return va > vb ? va - vb : vb - va;
      return va == vb ? 1 : 0;
    case BinOp::kNe:
      if (!want) return va > vb ? va - vb : vb - va;
      return va != vb ? 0 : 1;
    case BinOp::kLtu:
      return lt_err(va, vb, want);
    case BinOp::kGtu:
      return lt_err(vb, va, want);
    case BinOp::kLeu:
      return lt_err(vb, va, !want);
    case BinOp::kGeu:
      return lt_err(va, vb, !want);
    case BinOp::kAnd:
      if (e->width != 1) break;
      if (want)
        return sat_add(expr_err(e->a.get(), true, prog, v),
                       expr_err(e->b.get(), true, prog, v));
      return std::min(expr_err(e->a.get(), false, prog, v),
                      expr_err(e->b.get(), false, prog, v));
    case BinOp::kOr:
      if (e->width != 1) break;
      if (want)
        return std::min(expr_err(e->a.get(), true, prog, v),
                        expr_err(e->b.get(), true, prog, v));
      return sat_add(expr_err(e->a.get(), false, prog, v),
                     expr_err(e->b.get(), false, prog, v));
    default:
      break;
  }
  return truth == want ? 0 : 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

SolveResult solve(const std::vector<Constraint>& constraints,
                  const SolveBudget& budget) {
  for (const auto& c : constraints)
    if (!c.predicate) return {SolveStatus::kUnknown, {}, 0};

  std::set<std::uint32_t> dom_set;
  for (const auto& c : constraints)
    sym_collect_offsets(*c.predicate, dom_set);
  const std::vector<std::uint32_t> domain(dom_set.begin(), dom_set.end());

  auto verify = [&](const std::map<std::uint32_t, std::uint8_t>& a) {
    for (const auto& c : constraints)
      if ((sym_eval(*c.predicate, a) & 1) != (c.required ? 1u : 0u))
        return false;
    return true;
  };

  // ---- Tier 1: pin chains ----
  Tier1 t1;
  Ctx ctx;
  for (const auto& c : constraints) {
    const Out o = t1.constrain(c.predicate, c.required, ctx);
    if (o == Out::kUnsat) return {SolveStatus::kUnsat, {}, 1};
    // Give-ups still allow later constraints to contribute pins.
  }
  {
    // Even a partial pin set might already satisfy everything (give-ups
    // included); substitution is the arbiter either way.
    std::map<std::uint32_t, std::uint8_t> a;
    for (std::uint32_t off : domain) {
      auto it = ctx.pins.find(off);
      a.emplace(off, it == ctx.pins.end() ? 0 : it->second.value);
    }
    if (verify(a)) return {SolveStatus::kSat, std::move(a), 1};
  }

  // Per-predicate programs, shared by the enumeration and search tiers.
  std::vector<detail::SymProg> progs(constraints.size());
  std::vector<std::int32_t> roots(constraints.size());
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    roots[i] = progs[i].add(constraints[i].predicate);
    progs[i].bind(domain);
  }
  std::vector<std::vector<std::uint64_t>> vals(constraints.size());

  auto sat_under = [&](const std::uint8_t* bytes) {
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      progs[i].eval_fast(bytes, vals[i]);
      const bool truth = (vals[i][roots[i]] & 1) != 0;
      if (truth != constraints[i].required) return false;
    }
    return true;
  };
  auto to_map = [&](const std::vector<std::uint8_t>& bytes) {
    std::map<std::uint32_t, std::uint8_t> a;
    for (std::size_t i = 0; i < domain.size(); ++i)
      a.emplace(domain[i], bytes[i]);
    return a;
  };

  // ---- Tier 2: exhaustive enumeration for tiny domains ----
  if (domain.size() * 8 <= 24) {
    std::vector<std::uint8_t> bytes(domain.size(), 0);
    const std::uint64_t total = 1ull << (8 * domain.size());
    for (std::uint64_t word = 0; word < total; ++word) {
      for (std::size_t i = 0; i < domain.size(); ++i)
        bytes[i] = static_cast<std::uint8_t>(
            word >> (8 * (domain.size() - 1 - i)));
      if (sat_under(bytes.data())) {
        auto a = to_map(bytes);
        if (verify(a)) return {SolveStatus::kSat, std::move(a), 2};
      }
    }
    return {SolveStatus::kUnsat, {}, 2};
  }

  // ---- Tier 3: seeded hill climb ----
  Rng rng(budget.rng_seed);
  std::vector<std::uint8_t> cur(domain.size(), 0);
  for (std::size_t i = 0; i < domain.size(); ++i) {
    auto it = ctx.pins.find(domain[i]);
    if (it != ctx.pins.end()) cur[i] = it->second.value;
  }

  // Byte pool: mutation targets jump straight to bytes of constants that
  // appear in the system, plus the usual boundary values.
  std::vector<std::uint8_t> pool = {0x00, 0x01, 0x7f, 0x80, 0xff};
  for (const auto& prog : progs)
    for (const auto& n : prog.nodes)
      if (n.kind == SymExpr::Kind::kConst)
        for (unsigned b = 0; b < (n.width + 7u) / 8u; ++b)
          pool.push_back(static_cast<std::uint8_t>(n.value >> (8 * b)));
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  auto total_err = [&](const std::uint8_t* bytes) {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      progs[i].eval_fast(bytes, vals[i]);
      sum = sat_add(sum, expr_err(constraints[i].predicate.get(),
                                  constraints[i].required, progs[i], vals[i]));
    }
    return sum;
  };

  std::uint64_t evals = 0;
  std::uint64_t best = total_err(cur.data());
  ++evals;
  std::uint32_t since_improve = 0;
  std::vector<std::uint8_t> cand = cur;
  while (best != 0 && evals < budget.max_evals && !domain.empty()) {
    cand = cur;
    const std::size_t i = static_cast<std::size_t>(rng.below(cand.size()));
    switch (rng.below(4)) {
      case 0:
        cand[i] = rng.next_byte();
        break;
      case 1:
        cand[i] ^= static_cast<std::uint8_t>(1u << rng.below(8));
        break;
      case 2: {
        const std::uint8_t d = static_cast<std::uint8_t>(rng.below(16) + 1);
        cand[i] = rng.below(2) ? static_cast<std::uint8_t>(cand[i] - d)
                               : static_cast<std::uint8_t>(cand[i] + d);
        break;
      }
      case 3:
        cand[i] = pool[rng.below(pool.size())];
        break;
    }
    const std::uint64_t err = total_err(cand.data());
    ++evals;
    if (err <= best) {
      if (err < best)
        since_improve = 0;
      else
        ++since_improve;
      best = err;
      cur = cand;
    } else {
      ++since_improve;
    }
    if (best != 0 && since_improve > 256 && evals + 1 < budget.max_evals) {
      // Stuck on a plateau: restart from fresh noise.
      for (auto& byteval : cur) byteval = rng.next_byte();
      best = total_err(cur.data());
      ++evals;
      since_improve = 0;
    }
  }
  if (best == 0) {
    auto a = to_map(cur);
    if (verify(a)) return {SolveStatus::kSat, std::move(a), 3};
  }
  return {SolveStatus::kUnknown, {}, 3};
}

}  // namespace raretrig
