#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "raretrig/dut.hpp"

using namespace raretrig;
using raretrig::testing::parse_ok;

namespace {

std::string expect_error(const std::string& text, const std::string& category) {
  auto r = parse_dut(text);
  REQUIRE_FALSE(r.ok());
  CHECK(r.error().category == category);
  CHECK(r.error().line >= 1);
  CHECK(r.error().col >= 1);
  return r.error().message;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("parse fills derived execution fields") {
  Dut d = parse_ok(testing::kAccumDut);
  CHECK(d.name == "accum");
  CHECK(d.inputs.size() == 1);
  CHECK(d.registers.size() == 2);
  CHECK(d.registers[0].init == 5);
  CHECK(d.outputs.size() == 1);
  CHECK(d.blocks.size() == 3);
  CHECK(d.entry == 0);
  CHECK(d.max_cycles == 2);
  CHECK(d.frame_bytes == 1);
  CHECK(d.block_order == std::vector<BlockId>{0, 1, 2});
}

TEST_CASE("frame layout packs each input to whole bytes") {
  Dut d = parse_ok(R"(dut layout
input a 1
input b 9
input c 64
output y 1

block 0:
  v = a
  halt { y = v }

entry 0
max_cycles 1
)");
  // 1 -> 1 byte, 9 -> 2 bytes, 64 -> 8 bytes.
  CHECK(d.frame_bytes == 11);
  CHECK(d.input_byte_off == std::vector<std::uint32_t>{0, 1, 3});
}

TEST_CASE("render/parse round-trips structurally") {
  for (const char* text :
       {testing::kMagicByteDut, testing::kStraightDut, testing::kAccumDut}) {
    Dut d = parse_ok(text);
    Dut d2 = parse_ok(render_dut(d));
    CHECK(d == d2);
    // Rendering is a fixed point after one round.
    CHECK(render_dut(d) == render_dut(d2));
  }
}

TEST_CASE("every corpus design round-trips") {
  namespace fs = std::filesystem;
  const fs::path designs = fs::path(RARETRIG_CORPUS_DIR) / "designs";
  REQUIRE(fs::is_directory(designs));
  std::size_t seen = 0;
  for (const auto& e : fs::directory_iterator(designs)) {
    if (e.path().extension() != ".dut") continue;
    ++seen;
    INFO("file: ", e.path().string());
    Dut d = parse_ok(slurp(e.path()));
    CHECK(d == parse_ok(render_dut(d)));
  }
  CHECK(seen == 22);  // 9 trojan/clean twins + 4 standalone clean designs
}

TEST_CASE("operator precedence matches C") {
  // a + b * c parses as a + (b * c); | is looser than ^ is looser than &.
  Dut d = parse_ok(R"(dut prec
input a 8
input b 8
input c 8
output y 8

block 0:
  v = a + b * c
  w = a | b ^ c & a
  u = v + w
  halt { y = u }

entry 0
max_cycles 1
)");
  const Expr& v = d.blocks.at(0).stmts[0].rhs;
  REQUIRE(v.kind == Expr::Kind::kBinary);
  CHECK(v.bin == BinOp::kAdd);
  CHECK(v.args[1].bin == BinOp::kMul);

  const Expr& w = d.blocks.at(0).stmts[1].rhs;
  CHECK(w.bin == BinOp::kOr);
  REQUIRE(w.args[1].kind == Expr::Kind::kBinary);
  CHECK(w.args[1].bin == BinOp::kXor);
  CHECK(w.args[1].args[1].bin == BinOp::kAnd);
}

TEST_CASE("bang sugar lowers to == 0") {
  Dut d = parse_ok(R"(dut bang
input a 8
output y 1

block 0:
  z = !a
  halt { y = z }

entry 0
max_cycles 1
)");
  const Expr& z = d.blocks.at(0).stmts[0].rhs;
  REQUIRE(z.kind == Expr::Kind::kBinary);
  CHECK(z.bin == BinOp::kEq);
  CHECK(z.width == 1);
  CHECK(z.args[1].kind == Expr::Kind::kConst);
  CHECK(z.args[1].value == 0);
}

TEST_CASE("comparisons have width 1, local widths follow the rhs") {
  Dut d = parse_ok(testing::kMagicByteDut);
  const Expr& t = d.blocks.at(0).stmts[0].rhs;
  CHECK(t.width == 1);
  CHECK(is_comparison(t.bin));
}

TEST_CASE("unreachable directives attach to branch arms") {
  Dut d = parse_ok(R"(dut unr
input a 8
output y 8

unreachable 0.else

block 0:
  t = a <=u 0xff:8
  br t ? 1 : 2

block 1:
  v = a
  halt { y = v }

block 2:
  v = a + 1:8
  halt { y = v }

entry 0
max_cycles 1
)");
  REQUIRE(d.declared_unreachable.size() == 1);
  CHECK(d.declared_unreachable.begin()->site == 0);
  CHECK(d.declared_unreachable.begin()->arm == Arm::kElse);
}

TEST_CASE("parse error categories") {
  const std::string head = "dut t\ninput a 8\noutput y 8\n\n";
  const std::string tail = "\nentry 0\nmax_cycles 1\n";
  auto body = [&](const std::string& b) { return head + b + tail; };

  SUBCASE("unknown local") {
    expect_error(body("block 0:\n  v = nope\n  halt { y = v }\n"),
                 "unknown-name");
  }
  SUBCASE("mismatched operand widths") {
    expect_error(body("block 0:\n  b = 1:4\n  v = a + b\n  halt { y = v }\n"),
                 "width-mismatch");
  }
  SUBCASE("branch condition must be width 1") {
    expect_error(
        body("block 0:\n  v = a\n  br v ? 1 : 1\nblock 1:\n  w = a\n  halt { "
             "y = w }\n"),
        "width-mismatch");
  }
  SUBCASE("constant does not fit its width") {
    expect_error(body("block 0:\n  v = a + 0x1ff:8\n  halt { y = v }\n"),
                 "bad-constant");
  }
  SUBCASE("width out of range") {
    expect_error("dut t\ninput a 65\noutput y 8\n\nblock 0:\n  v = 1:8\n  "
                 "halt { y = v }\n" + tail,
                 "bad-width");
  }
  SUBCASE("duplicate block id") {
    expect_error(body("block 0:\n  v = a\n  halt { y = v }\n\nblock 0:\n  w = "
                      "a\n  halt { y = w }\n"),
                 "duplicate-name");
  }
  SUBCASE("duplicate port name") {
    expect_error("dut t\ninput a 8\ninput a 8\noutput y 8\n\nblock 0:\n  v = "
                 "a\n  halt { y = v }\n" + tail,
                 "duplicate-name");
  }
  SUBCASE("goto to an undefined block") {
    expect_error(body("block 0:\n  v = a\n  goto 9\n"), "dangling-target");
  }
  SUBCASE("halt must drive every output") {
    expect_error(body("block 0:\n  v = a\n  halt { }\n"),
                 "register-not-updated");
  }
  SUBCASE("cycle must latch every register") {
    expect_error("dut t\ninput a 8\nreg r 8 init 0\nreg s 8 init 0\noutput y "
                 "8\n\nblock 0:\n  v = a\n  cycle { r = v }\n" + tail,
                 "register-not-updated");
  }
  SUBCASE("unreachable must name a branch arm") {
    expect_error(body("unreachable 0.then\nblock 0:\n  v = a\n  halt { y = v "
                      "}\n"),
                 "dangling-target");
  }
  SUBCASE("missing entry line") {
    expect_error(head + "block 0:\n  v = a\n  halt { y = v }\n", "syntax");
  }
  SUBCASE("garbage line") { expect_error(body("what is this\n"), "syntax"); }
}

TEST_CASE("error positions point at the offending token") {
  auto r = parse_dut("dut t\ninput a 8\noutput y 8\n\nblock 0:\n  v = "
                     "nope\n  halt { y = v }\n\nentry 0\nmax_cycles 1\n");
  REQUIRE_FALSE(r.ok());
  CHECK(r.error().line == 6);
  CHECK(r.error().col == 7);  // the 'n' of "nope"
}
