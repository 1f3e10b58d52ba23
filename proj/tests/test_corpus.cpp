// The shipped benchmark corpus: manifest integrity, trigger construction,
// trojan/clean differential behavior, persistence of latched payloads, and
// the committed golden LUTs + detection vectors. RARETRIG_CORPUS_DIR points
// at the source-tree corpus/ directory.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "packing.hpp"
#include "raretrig/corpus.hpp"
#include "raretrig/detector.hpp"
#include "raretrig/dut.hpp"
#include "raretrig/instrument.hpp"

using namespace raretrig;
using namespace raretrig::testing;

namespace {

const std::string kCorpusDir = RARETRIG_CORPUS_DIR;

std::vector<CorpusEntry> manifest() { return corpus_manifest(kCorpusDir); }

std::string at(const std::string& rel) { return kCorpusDir + "/" + rel; }

// Runs both twins on the same bytes and reports whether the halted outputs
// differ. Fails the test if either design does not halt cleanly.
bool outputs_differ(const Dut& trojan, const InstrumentationPlan& tplan,
                    const Dut& clean, const InstrumentationPlan& cplan,
                    const std::vector<std::uint8_t>& bytes) {
  auto rt = execute(trojan, case_of(bytes), tplan);
  auto rc = execute(clean, case_of(bytes), cplan);
  REQUIRE(rt.ok());
  REQUIRE(rc.ok());
  REQUIRE(rt.value().terminated_by == Trace::End::kHalt);
  REQUIRE(rc.value().terminated_by == Trace::End::kHalt);
  return rt.value().outputs != rc.value().outputs;
}

}  // namespace

TEST_CASE("manifest lists the full benchmark set") {
  const auto entries = manifest();
  REQUIRE(entries.size() == 13);

  std::set<std::string> names;
  for (const auto& e : entries) names.insert(e.name);
  const std::set<std::string> expected{
      "magic32", "magic16",     "threshold_fir", "latch32", "latch_r",
      "seq4",    "seq2_r",      "count77",       "count_r", "deep_nest",
      "deep_nest_r", "loopy",   "loopy_r"};
  CHECK(names == expected);

  for (const auto& e : entries) {
    // Every referenced design file parses.
    const Dut dut = load_dut_file(at(e.dut_file));
    CHECK(dut.name == e.name);
    if (e.trojan_type != TrojanType::kNone) {
      // Trojaned entries carry the full kit: twin, trigger, LUT, vectors.
      REQUIRE(e.clean_file.has_value());
      REQUIRE(e.trigger.has_value());
      REQUIRE(e.lut_file.has_value());
      REQUIRE(e.vectors_dir.has_value());
      const Dut clean = load_dut_file(at(*e.clean_file));
      CHECK(clean.inputs == dut.inputs);
      CHECK(clean.outputs == dut.outputs);
      CHECK(!e.trigger->frames.empty());
      CHECK(e.trigger->neutral_frame.size() == dut.frame_bytes);
      for (const auto& fr : e.trigger->frames)
        CHECK(fr.size() == dut.frame_bytes);
    } else {
      CHECK(!e.clean_file.has_value());
      CHECK(!e.trigger.has_value());
      CHECK(!e.lut_file.has_value());
      CHECK(!e.vectors_dir.has_value());
    }
    // Reduced variants point back at a real full-width sibling.
    if (e.reduced_of) {
      CHECK(find_entry(entries, *e.reduced_of).has_value());
      CHECK(e.input_bits_total <= 16);
    }
  }

  const auto magic32 = find_entry(entries, "magic32");
  REQUIRE(magic32.has_value());
  CHECK(magic32->trojan_type == TrojanType::kCwom);
  CHECK(magic32->campaign_seed == 7);
  CHECK(magic32->rare_targets == 1);
  CHECK(magic32->input_bits_total == 40);
  REQUIRE(magic32->trigger.has_value());
  CHECK(magic32->trigger->frames ==
        std::vector<std::vector<std::uint8_t>>{{0xef, 0xbe, 0xad, 0xde, 0x00}});

  const auto magic16 = find_entry(entries, "magic16");
  REQUIRE(magic16.has_value());
  CHECK(magic16->reduced_of == "magic32");
  CHECK(magic16->input_bits_total == 16);

  CHECK(!find_entry(entries, "does_not_exist").has_value());
}

TEST_CASE("corpus dir resolution order") {
  const char* saved = std::getenv("RARETRIG_CORPUS");
  const std::string saved_val = saved ? saved : "";

  setenv("RARETRIG_CORPUS", "/tmp/from_env", 1);
  CHECK(resolve_corpus_dir("/explicit/wins") == "/explicit/wins");
  CHECK(resolve_corpus_dir("") == "/tmp/from_env");
  unsetenv("RARETRIG_CORPUS");
  CHECK(resolve_corpus_dir("") == "./corpus");

  if (saved) setenv("RARETRIG_CORPUS", saved_val.c_str(), 1);
}

TEST_CASE("missing files fail loudly") {
  CHECK_THROWS_AS(corpus_manifest("/no/such/dir"), std::runtime_error);
  CHECK_THROWS_AS(load_dut_file(at("nope.dut")), std::runtime_error);
  CHECK_THROWS_AS(load_testcases(at("not_a_dir")), std::runtime_error);
}

TEST_CASE("trigger_testcase lays out trigger frames then neutral padding") {
  TriggerInfo t;
  t.frames = {{1, 2}, {3, 4}};
  t.neutral_frame = {9, 9};
  const TestCase tc = trigger_testcase(t, 4);
  CHECK(tc.bytes == std::vector<std::uint8_t>{1, 2, 3, 4, 9, 9, 9, 9});
  CHECK(tc.origin == TestCase::Origin::kUser);

  // No padding requested beyond the trigger itself.
  CHECK(trigger_testcase(t, 2).bytes == std::vector<std::uint8_t>{1, 2, 3, 4});
  // Empty trigger: all neutral.
  TriggerInfo n;
  n.neutral_frame = {7};
  CHECK(trigger_testcase(n, 3).bytes == std::vector<std::uint8_t>{7, 7, 7});
}

TEST_CASE("trojan type tags round trip") {
  for (TrojanType t : {TrojanType::kNone, TrojanType::kCwom, TrojanType::kCwm,
                       TrojanType::kSwom, TrojanType::kSwm}) {
    auto r = trojan_type_from_tag(trojan_type_tag(t));
    REQUIRE(r.ok());
    CHECK(r.value() == t);
  }
  CHECK(!trojan_type_from_tag("gremlin").ok());
}

TEST_CASE("test case save/load round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "raretrig_tc_rt";
  std::filesystem::remove_all(dir);

  std::vector<TestCase> cases;
  TestCase a = case_of({0x01, 0x02}, 7);
  a.origin = TestCase::Origin::kRandom;
  TestCase b = case_of({0xff}, 3);
  b.origin = TestCase::Origin::kFuzz;
  TestCase c = case_of({}, 12);
  c.origin = TestCase::Origin::kConcolic;
  TestCase d = case_of({0xaa, 0xbb, 0xcc}, 1);
  d.origin = TestCase::Origin::kUser;
  cases = {a, b, c, d};
  save_testcases(dir.string(), cases);

  CHECK(std::filesystem::exists(dir / "tc_7_random.bin"));
  CHECK(std::filesystem::exists(dir / "tc_3_fuzz.bin"));
  CHECK(std::filesystem::exists(dir / "tc_12_concolic.bin"));
  CHECK(std::filesystem::exists(dir / "tc_1_user.bin"));

  const auto loaded = load_testcases(dir.string());
  REQUIRE(loaded.size() == 4);
  // Sorted by id regardless of directory iteration order.
  CHECK(loaded[0].id == 1);
  CHECK(loaded[1].id == 3);
  CHECK(loaded[2].id == 7);
  CHECK(loaded[3].id == 12);
  CHECK(loaded[0].bytes == d.bytes);
  CHECK(loaded[0].origin == TestCase::Origin::kUser);
  CHECK(loaded[1].bytes == b.bytes);
  CHECK(loaded[1].origin == TestCase::Origin::kFuzz);
  CHECK(loaded[2].bytes == a.bytes);
  CHECK(loaded[2].origin == TestCase::Origin::kRandom);
  CHECK(loaded[3].bytes == c.bytes);
  CHECK(loaded[3].origin == TestCase::Origin::kConcolic);

  std::filesystem::remove_all(dir);
}

TEST_CASE("trigger fires the payload, neutral input does not") {
  const auto entries = manifest();
  for (const auto& e : entries) {
    if (e.trojan_type == TrojanType::kNone) continue;
    CAPTURE(e.name);
    const Dut trojan = load_dut_file(at(e.dut_file));
    const Dut clean = load_dut_file(at(*e.clean_file));
    const auto tplan = full_plan(trojan);
    const auto cplan = full_plan(clean);

    const TestCase trig = trigger_testcase(*e.trigger, trojan.max_cycles);
    CHECK(outputs_differ(trojan, tplan, clean, cplan, trig.bytes));

    TriggerInfo neutral;
    neutral.neutral_frame = e.trigger->neutral_frame;
    const TestCase quiet = trigger_testcase(neutral, trojan.max_cycles);
    CHECK(!outputs_differ(trojan, tplan, clean, cplan, quiet.bytes));
  }
}

TEST_CASE("latched payloads persist past the trigger cycle") {
  const auto entries = manifest();
  // cwm/swm payloads latch: the output divergence shows up at halt even
  // though the trigger frames stop earlier and neutral input follows.
  for (const char* name : {"latch32", "latch_r", "count77", "count_r"}) {
    const auto e = find_entry(entries, name);
    REQUIRE(e.has_value());
    CAPTURE(name);
    const Dut trojan = load_dut_file(at(e->dut_file));
    const Dut clean = load_dut_file(at(*e->clean_file));
    const TestCase trig = trigger_testcase(*e->trigger, trojan.max_cycles);
    REQUIRE(e->trigger->frames.size() < trojan.max_cycles);

    auto rt = execute(trojan, trig, full_plan(trojan));
    REQUIRE(rt.ok());
    CHECK(rt.value().cycles_run == trojan.max_cycles);
    CHECK(outputs_differ(trojan, full_plan(trojan), clean, full_plan(clean),
                         trig.bytes));
  }
}

TEST_CASE("reduced trojans: exhaustive differential census") {
  const auto entries = manifest();
  // Reduced twins span a 16-bit effective input space, so the trojan/clean
  // differential set can be enumerated outright. The counts pin how rare
  // each trigger is; the trigger input itself must be in the differing set.
  const struct {
    const char* name;
    std::uint32_t differing;
  } expected[] = {
      {"magic16", 1},    // one exact 16-bit match
      {"latch_r", 256},  // trigger byte in frame 1, second frame free
      {"seq2_r", 1},     // exact two-frame sequence
      {"count_r", 736},  // counter reaches threshold by several routes
  };
  for (const auto& [name, differing] : expected) {
    const auto e = find_entry(entries, name);
    REQUIRE(e.has_value());
    CAPTURE(name);
    const Dut trojan = load_dut_file(at(e->dut_file));
    const Dut clean = load_dut_file(at(*e->clean_file));
    const auto tplan = full_plan(trojan);
    const auto cplan = full_plan(clean);
    REQUIRE(e->input_bits_total == 16);
    REQUIRE(effective_bits_per_frame(trojan) * trojan.max_cycles == 16);

    const TestCase trig = trigger_testcase(*e->trigger, trojan.max_cycles);

    std::uint32_t count = 0;
    bool trigger_differs = false;
    for (std::uint32_t v = 0; v <= 0xffff; ++v) {
      const auto bytes = pack_effective(trojan, trojan.max_cycles, v);
      if (outputs_differ(trojan, tplan, clean, cplan, bytes)) {
        ++count;
        if (bytes == trig.bytes) trigger_differs = true;
      }
    }
    CHECK(count == differing);
    CHECK(trigger_differs);
  }
}

TEST_CASE("committed LUTs and vectors detect every trojan, clear every twin") {
  const auto entries = manifest();
  std::uint32_t checked = 0;
  for (const auto& e : entries) {
    if (!e.lut_file) continue;
    CAPTURE(e.name);
    const Dut trojan = load_dut_file(at(e.dut_file));
    const Dut clean = load_dut_file(at(*e.clean_file));
    auto lut = load_lut(at(*e.lut_file));
    REQUIRE(lut.ok());
    CHECK(lut.value().size() > 0);
    const auto vectors = load_testcases(at(*e.vectors_dir));
    REQUIRE(!vectors.empty());

    const DetectionReport hit =
        detect_all(trojan, full_plan(trojan), lut.value(), vectors);
    CHECK(hit.trojan_found);
    CHECK(hit.not_in_lut == 0);

    const DetectionReport miss =
        detect_all(clean, full_plan(clean), lut.value(), vectors);
    CHECK(!miss.trojan_found);
    CHECK(miss.not_in_lut == 0);
    ++checked;
  }
  CHECK(checked == 9);
}
