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
//
// Regenerates the committed corpus artifacts (detection vectors and golden
// LUTs) from the design files and manifest seeds. Everything is derived
// deterministically from each entry's campaign_seed, so a re-run must
// reproduce the committed files bit for bit. Exits 1 if any manifest
// bookkeeping number (rare_targets, input_bits_total) disagrees with what
// the designs actually produce, printing the actual values to fix it with.

#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "raretrig/corpus.hpp"
#include "raretrig/detector.hpp"
#include "raretrig/dut.hpp"
#include "raretrig/orchestrator.hpp"

namespace {

using namespace raretrig;

constexpr std::uint64_t kTagVectors = 0x56454353ull;  // extra random vectors
constexpr std::uint64_t kTagSalt = 0x53414c54ull;     // LUT digest salt

std::uint32_t input_bits_total(const Dut& dut) {
  std::uint32_t bits = 0;
  for (const auto& p : dut.inputs) bits += p.width;
  return bits * dut.max_cycles;
}

// Detection vectors for one entry: the campaign corpus, the documented
// trigger case, and 32 extra random cases; dropped if they fail to halt on
// the reference, deduplicated by content, re-numbered 1..N.
std::vector<TestCase> detection_vectors(const CorpusEntry& entry,
                                        const Dut& suspect,
                                        const Dut& reference,
                                        std::vector<TestCase> campaign_corpus) {
  std::vector<TestCase> pool = std::move(campaign_corpus);
  if (entry.trigger)
    pool.push_back(trigger_testcase(*entry.trigger, suspect.max_cycles));
  Rng rng(Rng::derive_seed(entry.campaign_seed, kTagVectors));
  for (int i = 0; i < 32; ++i)
    pool.push_back(random_testcase(reference, reference.max_cycles, rng));

  CampaignConfig cc;
  cc.selective = false;
  const InstrumentationPlan plan = campaign_plan(reference, cc);
  std::vector<TestCase> out;
  std::set<std::vector<std::uint8_t>> seen;
  for (TestCase& tc : pool) {
    if (!seen.insert(tc.bytes).second) continue;
    auto r = execute(reference, tc, plan);
    if (!r.ok() || r.value().terminated_by != Trace::End::kHalt) continue;
    tc.id = out.size() + 1;
    out.push_back(std::move(tc));
  }
  return out;
}

std::array<std::uint8_t, 16> derive_salt(std::uint64_t campaign_seed) {
  Rng rng(Rng::derive_seed(campaign_seed, kTagSalt));
  std::array<std::uint8_t, 16> salt{};
  for (auto& b : salt) b = rng.next_byte();
  return salt;
}

// Returns false if the manifest numbers disagree with reality.
bool process_entry(const std::string& corpus_dir, const CorpusEntry& entry,
                   bool verbose) {
  bool ok = true;
  const Dut suspect = load_dut_file(corpus_dir + "/" + entry.dut_file);

  CampaignConfig cc;
  cc.rng_seed = entry.campaign_seed;
  const InstrumentationPlan full =
      campaign_plan(suspect, [&] {
        CampaignConfig f = cc;
        f.selective = false;
        return f;
      }());
  const std::set<BranchEdge> rare = identify_rare_targets(suspect, full, cc);

  nlohmann::json j;
  j["name"] = entry.name;
  j["rare_targets"] = rare.size();
  j["input_bits_total"] = input_bits_total(suspect);

  if (rare.size() != entry.rare_targets) {
    std::cerr << entry.name << ": manifest rare_targets="
              << entry.rare_targets << " but sim finds " << rare.size()
              << "\n";
    ok = false;
  }
  if (input_bits_total(suspect) != entry.input_bits_total) {
    std::cerr << entry.name << ": manifest input_bits_total="
              << entry.input_bits_total << " but design has "
              << input_bits_total(suspect) << "\n";
    ok = false;
  }

  if (entry.vectors_dir || entry.lut_file) {
    const CampaignResult res = run_campaign(suspect, cc);
    j["campaign_outcome"] = res.report.outcome;
    j["campaign_phases"] = res.report.phases;
    if (res.report.outcome != "all_covered") {
      std::cerr << entry.name << ": campaign ended in '"
                << res.report.outcome << "' (" << res.report.phases << ")\n";
      ok = false;
    }

    const Dut reference = entry.clean_file
                              ? load_dut_file(corpus_dir + "/" +
                                              *entry.clean_file)
                              : suspect;
    const std::vector<TestCase> vectors =
        detection_vectors(entry, suspect, reference, res.corpus);
    j["vectors"] = vectors.size();

    if (entry.vectors_dir)
      save_testcases(corpus_dir + "/" + *entry.vectors_dir, vectors);
    if (entry.lut_file) {
      CampaignConfig plain;
      plain.selective = false;
      auto lut = build_lut(reference, campaign_plan(reference, plain),
                           vectors, derive_salt(entry.campaign_seed));
      if (!lut.ok()) {
        // detection_vectors already dropped non-halters; belt and braces.
        std::cerr << entry.name << ": " << lut.error().message << "\n";
        return false;
      }
      save_lut(lut.value(), corpus_dir + "/" + *entry.lut_file);
      j["lut_entries"] = lut.value().size();
    }
  }

  if (verbose) std::cout << j.dump(2) << "\n";
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regenerate committed corpus artifacts (vectors, golden LUTs)"};
  std::string corpus_dir;
  std::vector<std::string> names;
  bool quiet = false;
  app.add_option("--corpus-dir", corpus_dir,
                 "corpus directory (default $RARETRIG_CORPUS or ./corpus)");
  app.add_option("entries", names, "entries to regenerate (default: all)");
  app.add_flag("--quiet", quiet, "suppress per-entry summaries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const std::string dir = resolve_corpus_dir(corpus_dir);
    const std::vector<CorpusEntry> entries = corpus_manifest(dir);
    bool all_ok = true;
    for (const auto& entry : entries) {
      if (!names.empty() &&
          std::find(names.begin(), names.end(), entry.name) == names.end())
        continue;
      all_ok = process_entry(dir, entry, !quiet) && all_ok;
    }
    return all_ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
