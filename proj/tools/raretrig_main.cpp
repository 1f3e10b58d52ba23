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
// Command-line front end. Exit codes: 0 = done / objective met, 1 = ran but
// objective not met (rare arm uncovered, expectation violated), 2 = usage,
// parse or IO error.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "raretrig/concolic.hpp"
#include "raretrig/corpus.hpp"
#include "raretrig/coverage.hpp"
#include "raretrig/detector.hpp"
#include "raretrig/dut.hpp"
#include "raretrig/fuzz.hpp"
#include "raretrig/instrument.hpp"
#include "raretrig/orchestrator.hpp"

namespace {

using namespace raretrig;

// Writes to `path`, or stdout when empty / "-".
void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << text << "\n";
  if (!f) throw std::runtime_error("short write: " + path);
}

SymRange parse_sym(const std::string& spec) {
  SymRange r;
  if (spec.empty() || spec == "all") return r;  // empty spans = all bytes
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("bad --sym span '" + item +
                               "' (want offset:length)");
    SymRange::Span sp;
    sp.offset = static_cast<std::uint32_t>(std::stoul(item.substr(0, colon)));
    sp.length =
        static_cast<std::uint32_t>(std::stoul(item.substr(colon + 1)));
    if (sp.length == 0)
      throw std::runtime_error("zero-length --sym span: " + item);
    r.spans.push_back(sp);
  }
  return r;
}

std::array<std::uint8_t, 16> parse_salt(const std::string& hex) {
  if (hex.size() != 32)
    throw std::runtime_error("--salt wants exactly 32 hex chars");
  std::array<std::uint8_t, 16> out{};
  for (std::size_t i = 0; i < 16; ++i) {
    const std::string byte = hex.substr(2 * i, 2);
    std::size_t used = 0;
    out[i] = static_cast<std::uint8_t>(std::stoul(byte, &used, 16));
    if (used != 2) throw std::runtime_error("bad hex in --salt: " + byte);
  }
  return out;
}

nlohmann::json edges_json(const std::set<BranchEdge>& edges) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : edges) arr.push_back(to_string(e));
  return arr;
}

std::uint32_t count_rare_covered(const std::set<BranchEdge>& rare,
                                 const std::set<BranchEdge>& covered) {
  std::uint32_t n = 0;
  for (const auto& e : rare) n += covered.count(e) ? 1 : 0;
  return n;
}

// Seeds for standalone fuzz/concolic runs; the campaign derives its own.
std::vector<TestCase> random_seeds(const Dut& dut, std::uint32_t count,
                                   std::uint64_t seed) {
  Rng rng(Rng::derive_seed(seed, 0x53454544ull));  // "SEED"
  std::vector<TestCase> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    TestCase tc = random_testcase(dut, dut.max_cycles, rng);
    tc.id = i + 1;
    out.push_back(std::move(tc));
  }
  return out;
}

// Options shared by the analysis subcommands.
struct Common {
  std::string dut_file;
  std::string out;        // report destination ("" / "-" = stdout)
  std::string emit_plan;  // plan destination, empty = don't emit
  std::string save_vectors;
  std::uint64_t seed = 0;
  std::uint32_t cases = 16;
  unsigned jobs = 1;
  bool selective = false;
  bool deterministic = true;
};

void add_common(CLI::App* cmd, Common& c, bool selective_default) {
  cmd->add_option("dut", c.dut_file, "design source file")->required();
  cmd->add_option("--seed", c.seed, "campaign RNG seed");
  cmd->add_option("--cases", c.cases, "random-simulation cases")
      ->capture_default_str();
  cmd->add_option("--out", c.out, "report file (default stdout)");
  cmd->add_option("--emit-plan", c.emit_plan,
                  "write the instrumentation plan as JSON ('-' = stdout)");
  c.selective = selective_default;
  cmd->add_flag("--selective,!--full", c.selective,
                "instrument selectively (dominator-pruned) vs every block");
  cmd->add_flag("--deterministic", c.deterministic,
                "work-count sized, bit-reproducible runs (the default; "
                "campaign --wall switches to wall-time windows)");
}

CampaignConfig base_config(const Common& c) {
  CampaignConfig cc;
  cc.rng_seed = c.seed;
  cc.random_sim_cases = c.cases;
  cc.selective = c.selective;
  cc.jobs = c.jobs;
  return cc;
}

int cmd_sim(const Common& c) {
  const Dut dut = load_dut_file(c.dut_file);
  const CampaignConfig cc = base_config(c);
  const InstrumentationPlan plan = campaign_plan(dut, cc);
  if (!c.emit_plan.empty()) write_output(c.emit_plan, plan_to_json(plan));
  const std::set<BranchEdge> rare = identify_rare_targets(dut, plan, cc);
  nlohmann::json j;
  j["dut_name"] = dut.name;
  j["total_blocks"] = dut.blocks.size();
  j["sim_cases"] = c.cases;
  j["rare_targets"] = edges_json(rare);
  j["rare_count"] = rare.size();
  write_output(c.out, j.dump(2));
  return 0;
}

int cmd_fuzz(const Common& c, std::uint64_t max_execs) {
  const Dut dut = load_dut_file(c.dut_file);
  const CampaignConfig cc = base_config(c);
  const InstrumentationPlan plan = campaign_plan(dut, cc);
  if (!c.emit_plan.empty()) write_output(c.emit_plan, plan_to_json(plan));
  const std::set<BranchEdge> rare = identify_rare_targets(dut, plan, cc);

  FuzzBudget budget;
  budget.max_execs = max_execs;
  const FuzzQueue q =
      fuzz_loop(dut, plan, random_seeds(dut, c.cases, c.seed), budget, rare,
                Rng::derive_seed(c.seed, 0x46555a5aull), c.jobs);  // "FUZZ"

  const std::uint32_t hit = count_rare_covered(rare, q.covered);
  nlohmann::json j;
  j["dut_name"] = dut.name;
  j["execs"] = q.stats.execs;
  j["admitted"] = q.stats.admitted;
  j["exec_errors"] = q.stats.exec_errors;
  j["queue_size"] = q.entries.size();
  j["covered_arms"] = edges_json(q.covered);
  j["rare_total"] = rare.size();
  j["rare_covered"] = hit;
  write_output(c.out, j.dump(2));
  if (!c.save_vectors.empty()) {
    std::vector<TestCase> tcs;
    for (const auto& e : q.entries) tcs.push_back(e.tc);
    save_testcases(c.save_vectors, tcs);
  }
  return hit == rare.size() ? 0 : 1;
}

int cmd_concolic(const Common& c, std::uint64_t max_solves,
                 std::uint64_t max_evals, const std::string& sym_spec,
                 const std::string& seeds_dir) {
  const Dut dut = load_dut_file(c.dut_file);
  const CampaignConfig cc = base_config(c);
  const InstrumentationPlan plan = campaign_plan(dut, cc);
  if (!c.emit_plan.empty()) write_output(c.emit_plan, plan_to_json(plan));
  const std::set<BranchEdge> rare = identify_rare_targets(dut, plan, cc);
  const SymRange sym = parse_sym(sym_spec);

  std::vector<TestCase> seeds;
  if (!seeds_dir.empty()) seeds = load_testcases(seeds_dir);

  ConcolicBudget budget;
  budget.max_solves = max_solves;
  budget.per_solve.max_evals = max_evals;
  budget.per_solve.rng_seed = Rng::derive_seed(c.seed, 0x534f4c56ull);

  ExecutionTree tree;
  ConcolicEngine engine(dut, plan, sym, tree);
  const std::vector<GeneratedCase> gen =
      engine.run(seeds, budget, rare, c.jobs);

  const std::uint32_t hit = count_rare_covered(rare, engine.covered());
  nlohmann::json j;
  j["dut_name"] = dut.name;
  j["solver_calls"] = engine.stats().solver_calls;
  j["sat"] = engine.stats().sat;
  j["unsat"] = engine.stats().unsat;
  j["unknown"] = engine.stats().unknown;
  j["frontier_exhausted"] = engine.stats().frontier_exhausted;
  j["generated"] = gen.size();
  j["tree_nodes"] = tree.node_count();
  j["paths_merged"] = tree.paths_merged;
  j["divergences"] = tree.divergences;
  j["covered_arms"] = edges_json(engine.covered());
  j["rare_total"] = rare.size();
  j["rare_covered"] = hit;
  write_output(c.out, j.dump(2));
  if (!c.save_vectors.empty()) {
    std::vector<TestCase> tcs;
    for (const auto& g : gen) tcs.push_back(g.tc);
    save_testcases(c.save_vectors, tcs);
  }
  return hit == rare.size() ? 0 : 1;
}

struct CampaignOpts {
  bool wall = false;
  double time_cutoff_s = 0.0;  // 0 = none
  std::uint64_t execs_per_window = 50000;
  std::uint64_t solves_per_window = 64;
  std::uint64_t max_evals = 2000;
  std::uint32_t max_fuzz_phases = 5;
  std::uint32_t max_conc_phases = 5;
  std::uint32_t stall_window = 5;
};

int cmd_campaign(const Common& c, const CampaignOpts& o) {
  const Dut dut = load_dut_file(c.dut_file);
  CampaignConfig cc = base_config(c);
  cc.deterministic = !o.wall;
  if (o.time_cutoff_s > 0) cc.time_cutoff_s = o.time_cutoff_s;
  cc.execs_per_threshold = o.execs_per_window;
  cc.solves_per_threshold = o.solves_per_window;
  cc.per_solve.max_evals = o.max_evals;
  cc.max_fuzz_phases = o.max_fuzz_phases;
  cc.max_conc_phases = o.max_conc_phases;
  cc.stall_window = o.stall_window;
  if (!c.emit_plan.empty())
    write_output(c.emit_plan, plan_to_json(campaign_plan(dut, cc)));

  const CampaignResult res = run_campaign(dut, cc);
  write_output(c.out, campaign_report_to_json(res.report));
  if (!c.save_vectors.empty()) save_testcases(c.save_vectors, res.corpus);
  return res.report.outcome == "all_covered" ? 0 : 1;
}

int cmd_coverage(const Common& c, const std::string& vectors_dir) {
  const Dut dut = load_dut_file(c.dut_file);
  const CampaignConfig cc = base_config(c);
  const InstrumentationPlan plan = campaign_plan(dut, cc);
  if (!c.emit_plan.empty()) write_output(c.emit_plan, plan_to_json(plan));
  const std::set<BranchEdge> rare = identify_rare_targets(dut, plan, cc);
  const std::vector<TestCase> tcs = load_testcases(vectors_dir);
  const CoverageReport rep = evaluate(dut, plan, tcs, rare);
  write_output(c.out, coverage_report_to_json(rep));
  return rep.rare_covered_count == rep.rare_total ? 0 : 1;
}

int cmd_gen_lut(const std::string& dut_file, const std::string& vectors_dir,
                const std::string& out, const std::string& salt_hex) {
  const Dut dut = load_dut_file(dut_file);
  CampaignConfig cc;
  cc.selective = false;
  const InstrumentationPlan plan = campaign_plan(dut, cc);
  const std::vector<TestCase> tcs = load_testcases(vectors_dir);
  const auto salt =
      salt_hex.empty() ? std::array<std::uint8_t, 16>{} : parse_salt(salt_hex);
  auto r = build_lut(dut, plan, tcs, salt);
  if (!r.ok()) {
    std::cerr << "error: " << r.error().message << " (ids:";
    for (auto id : r.error().ids) std::cerr << " " << id;
    std::cerr << ")\n";
    return 1;
  }
  save_lut(r.value(), out);
  nlohmann::json j;
  j["lut_file"] = out;
  j["entries"] = r.value().size();
  j["vectors"] = tcs.size();
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_detect(const std::string& dut_file, const std::string& lut_file,
               const std::string& vectors_dir, const std::string& out,
               bool expect_clean, bool expect_trojan) {
  const Dut suspect = load_dut_file(dut_file);
  auto lut = load_lut(lut_file);
  if (!lut.ok()) throw std::runtime_error(lut_file + ": " + lut.error());
  CampaignConfig cc;
  cc.selective = false;
  const InstrumentationPlan plan = campaign_plan(suspect, cc);
  const std::vector<TestCase> tcs = load_testcases(vectors_dir);
  const DetectionReport rep = detect_all(suspect, plan, lut.value(), tcs);
  write_output(out, detection_report_to_json(rep));
  if (expect_clean) return rep.trojan_found ? 1 : 0;
  if (expect_trojan) return rep.trojan_found ? 0 : 1;
  return 0;
}

nlohmann::json entry_json(const CorpusEntry& e) {
  nlohmann::json j;
  j["name"] = e.name;
  j["dut_file"] = e.dut_file;
  j["trojan_type"] = trojan_type_tag(e.trojan_type);
  if (e.clean_file) j["clean_file"] = *e.clean_file;
  j["rare_targets"] = e.rare_targets;
  j["campaign_seed"] = e.campaign_seed;
  j["input_bits_total"] = e.input_bits_total;
  if (e.lut_file) j["lut_file"] = *e.lut_file;
  if (e.vectors_dir) j["vectors_dir"] = *e.vectors_dir;
  if (e.reduced_of) j["reduced_of"] = *e.reduced_of;
  if (e.trigger) {
    j["trigger_frames"] = e.trigger->frames.size();
    j["trigger_description"] = e.trigger->description;
  }
  return j;
}

int cmd_corpus(const std::string& dir, const std::string& name,
               const std::string& out) {
  const std::string corpus_dir = resolve_corpus_dir(dir);
  const std::vector<CorpusEntry> entries = corpus_manifest(corpus_dir);
  if (name.empty()) {
    nlohmann::json j;
    j["corpus_dir"] = corpus_dir;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : entries) j["entries"].push_back(entry_json(e));
    write_output(out, j.dump(2));
    return 0;
  }
  const auto e = find_entry(entries, name);
  if (!e) {
    std::cerr << "error: no corpus entry named '" << name << "'\n";
    return 2;
  }
  write_output(out, entry_json(*e).dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "rare-branch test generation and trojan detection for synchronous "
      "block designs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "raretrig 0.1.0");

  Common sim_c, fuzz_c, conc_c, camp_c, cov_c;
  std::uint64_t max_execs = 200000;
  std::uint64_t max_solves = 64, max_evals = 2000;
  std::string sym_spec, seeds_dir, vectors_dir, lut_file, salt_hex;
  std::string gen_dut, gen_out, det_dut, corpus_dir, corpus_name;
  std::string gen_lut_out = "golden.lut", det_out, corpus_out;
  bool expect_clean = false, expect_trojan = false;
  CampaignOpts camp_o;

  auto* sim = app.add_subcommand(
      "sim", "random simulation: report branch arms never taken");
  add_common(sim, sim_c, false);

  auto* fuzz = app.add_subcommand(
      "fuzz", "coverage-guided fuzzing against the rare arms");
  add_common(fuzz, fuzz_c, false);
  fuzz->add_option("--max-execs", max_execs, "execution budget")
      ->capture_default_str();
  fuzz->add_option("--jobs", fuzz_c.jobs, "worker threads");
  fuzz->add_option("--save-vectors", fuzz_c.save_vectors,
                   "write the final queue to this directory");

  auto* conc = app.add_subcommand(
      "concolic", "one concolic phase: negate uncovered decisions");
  add_common(conc, conc_c, false);
  conc->add_option("--max-solves", max_solves, "solver-call budget")
      ->capture_default_str();
  conc->add_option("--max-evals", max_evals,
                   "search-tier evaluations per solve")
      ->capture_default_str();
  conc->add_option("--sym", sym_spec,
                   "symbolic byte spans 'off:len[,off:len...]' (default all)");
  conc->add_option("--seeds", seeds_dir, "seed test cases (directory)");
  conc->add_option("--jobs", conc_c.jobs, "worker threads");
  conc->add_option("--save-vectors", conc_c.save_vectors,
                   "write generated cases to this directory");

  auto* camp = app.add_subcommand(
      "campaign", "alternating fuzz/concolic phases until rare arms covered");
  add_common(camp, camp_c, true);
  camp->add_option("--jobs", camp_c.jobs, "worker threads");
  camp->add_flag("--wall", camp_o.wall,
                 "size phases by wall time instead of work counts");
  camp->add_option("--time-cutoff", camp_o.time_cutoff_s,
                   "whole-campaign wall cap, seconds (with --wall)");
  camp->add_option("--execs-per-window", camp_o.execs_per_window,
                   "fuzz window size, executions")
      ->capture_default_str();
  camp->add_option("--solves-per-window", camp_o.solves_per_window,
                   "concolic phase solver budget")
      ->capture_default_str();
  camp->add_option("--max-evals", camp_o.max_evals,
                   "search-tier evaluations per solve")
      ->capture_default_str();
  camp->add_option("--max-fuzz-phases", camp_o.max_fuzz_phases, "")
      ->capture_default_str();
  camp->add_option("--max-conc-phases", camp_o.max_conc_phases, "")
      ->capture_default_str();
  camp->add_option("--stall-window", camp_o.stall_window,
                   "quiet windows before a fuzz phase yields")
      ->capture_default_str();
  camp->add_option("--save-vectors", camp_c.save_vectors,
                   "write the final corpus to this directory");

  auto* cov = app.add_subcommand(
      "coverage", "replay vectors and score them against the rare arms");
  add_common(cov, cov_c, false);
  cov->add_option("--vectors", vectors_dir, "test-case directory")
      ->required();

  auto* gen = app.add_subcommand(
      "gen-lut", "build the golden response table from a trusted reference");
  gen->add_option("dut", gen_dut, "trusted reference design")->required();
  gen->add_option("--vectors", seeds_dir, "test-case directory")->required();
  gen->add_option("--out", gen_lut_out, "output LUT file")
      ->capture_default_str();
  gen->add_option("--salt", salt_hex, "16-byte digest salt, 32 hex chars");

  auto* det = app.add_subcommand(
      "detect", "check a suspect design against a golden response table");
  det->add_option("dut", det_dut, "suspect design")->required();
  det->add_option("--lut", lut_file, "golden LUT file")->required();
  det->add_option("--vectors", vectors_dir, "test-case directory")
      ->required();
  det->add_option("--out", det_out, "report file (default stdout)");
  det->add_flag("--expect-clean", expect_clean,
                "exit 1 if a trojan is detected");
  det->add_flag("--expect-trojan", expect_trojan,
                "exit 1 if no trojan is detected");

  auto* corp =
      app.add_subcommand("corpus", "list the benchmark corpus manifest");
  corp->add_option("name", corpus_name, "entry to show (default: all)");
  corp->add_option("--corpus-dir", corpus_dir,
                   "corpus directory (default $RARETRIG_CORPUS or ./corpus)");
  corp->add_option("--out", corpus_out, "report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // help/version exit 0; usage errors exit 2
  }

  try {
    if (app.got_subcommand(sim)) return cmd_sim(sim_c);
    if (app.got_subcommand(fuzz)) return cmd_fuzz(fuzz_c, max_execs);
    if (app.got_subcommand(conc))
      return cmd_concolic(conc_c, max_solves, max_evals, sym_spec, seeds_dir);
    if (app.got_subcommand(camp)) return cmd_campaign(camp_c, camp_o);
    if (app.got_subcommand(cov)) return cmd_coverage(cov_c, vectors_dir);
    if (app.got_subcommand(gen))
      return cmd_gen_lut(gen_dut, seeds_dir, gen_lut_out, salt_hex);
    if (app.got_subcommand(det))
      return cmd_detect(det_dut, lut_file, vectors_dir, det_out, expect_clean,
                        expect_trojan);
    if (app.got_subcommand(corp))
      return cmd_corpus(corpus_dir, corpus_name, corpus_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
