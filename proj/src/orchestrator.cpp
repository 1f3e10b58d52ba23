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

#include "raretrig/orchestrator.hpp"

#include <algorithm>
#include <chrono>

#include "raretrig/coverage.hpp"
#include "raretrig/rng.hpp"

#include <nlohmann/json.hpp>

namespace raretrig {

namespace {

// Stream-splitting tags; arbitrary but fixed so campaigns replay exactly.
constexpr std::uint64_t kTagSim = 0x524e442d53494d00ull;    // random sim
constexpr std::uint64_t kTagFuzz = 0x46555a5a00000000ull;   // fuzz engine
constexpr std::uint64_t kTagSolve = 0x534f4c5645000000ull;  // solver search
constexpr std::uint64_t kTagLabels = 0x4c4142454c530000ull; // block labels

// Every then/else arm of a reachable branch block, minus the arms the
// design declares unreachable.
std::set<BranchEdge> coverable_arms(const Dut& dut, const DomTree& dom) {
  std::set<BranchEdge> out;
  for (const auto& [id, blk] : dut.blocks) {
    if (blk.term.kind != Terminator::Kind::kBranch) continue;
    if (!dom.reachable.count(id)) continue;
    for (Arm arm : {Arm::kThen, Arm::kElse}) {
      const BranchEdge e{id, arm};
      if (!dut.declared_unreachable.count(e)) out.insert(e);
    }
  }
  return out;
}

std::vector<TestCase> make_sim_cases(const Dut& dut,
                                     const CampaignConfig& config) {
  Rng rng(Rng::derive_seed(config.rng_seed, kTagSim));
  std::vector<TestCase> cases;
  cases.reserve(config.random_sim_cases);
  for (std::uint32_t i = 0; i < config.random_sim_cases; ++i) {
    TestCase tc = random_testcase(dut, dut.max_cycles, rng);
    tc.id = i + 1;
    cases.push_back(std::move(tc));
  }
  return cases;
}

}  // namespace

std::set<BranchEdge> identify_rare_targets(const Dut& dut,
                                           const InstrumentationPlan& plan,
                                           const CampaignConfig& config) {
  const DomTree dom = compute_dominators(dut);
  std::set<BranchEdge> rare = coverable_arms(dut, dom);
  for (const TestCase& tc : make_sim_cases(dut, config)) {
    auto r = execute(dut, tc, plan);
    if (!r.ok()) continue;  // generated cases are frame-exact; defensive
    for (const auto& [site, taken] : r.value().branch_events)
      rare.erase({site, taken ? Arm::kThen : Arm::kElse});
  }
  return rare;
}

InstrumentationPlan campaign_plan(const Dut& dut,
                                  const CampaignConfig& config) {
  const DomTree dom = compute_dominators(dut);
  const std::uint64_t label_seed =
      Rng::derive_seed(config.rng_seed, kTagLabels);
  const InstrumentationPlan full_plan = select_blocks(
      dut, dom, {}, InstrumentationPlan::Mode::kFull, label_seed);
  if (!config.selective) return full_plan;
  const std::set<BranchEdge> rare =
      identify_rare_targets(dut, full_plan, config);
  return select_blocks(dut, dom, rare, InstrumentationPlan::Mode::kSelective,
                       label_seed);
}

CampaignResult run_campaign(const Dut& dut, const CampaignConfig& config) {
  using clock = std::chrono::steady_clock;
  const auto campaign_start = clock::now();
  const std::uint64_t label_seed =
      Rng::derive_seed(config.rng_seed, kTagLabels);

  CampaignResult result;
  CampaignReport& rep = result.report;
  rep.dut_name = dut.name;
  rep.total_blocks = static_cast<std::uint32_t>(dut.blocks.size());

  const DomTree dom = compute_dominators(dut);
  const std::set<BranchEdge> coverable = coverable_arms(dut, dom);

  // Random simulation under full instrumentation: find what never fires.
  const InstrumentationPlan full_plan = select_blocks(
      dut, dom, {}, InstrumentationPlan::Mode::kFull, label_seed);
  std::vector<TestCase> sim_cases = make_sim_cases(dut, config);
  std::set<BranchEdge> sim_covered;
  std::set<BranchEdge> rare = coverable;
  for (const TestCase& tc : sim_cases) {
    auto r = execute(dut, tc, full_plan);
    if (!r.ok()) continue;
    for (const auto& [site, taken] : r.value().branch_events) {
      const BranchEdge e{site, taken ? Arm::kThen : Arm::kElse};
      sim_covered.insert(e);
      rare.erase(e);
    }
  }
  rep.rare_targets = rare;
  rep.total_execs += sim_cases.size();

  // Instrumentation keyed to the rare arms' sites.
  const InstrumentationPlan plan =
      config.selective
          ? select_blocks(dut, dom, rare,
                          InstrumentationPlan::Mode::kSelective, label_seed)
          : full_plan;
  rep.instrumented_blocks =
      static_cast<std::uint32_t>(plan.instrumented.size());

  auto finish = [&](FuzzEngine* eng) {
    rep.covered = sim_covered;
    if (eng) {
      for (const auto& e : eng->covered()) rep.covered.insert(e);
      result.corpus = eng->testcases();
      rep.total_testcases = result.corpus.size();
      for (const TestCase& tc : result.corpus)
        if (tc.origin != TestCase::Origin::kRandom) ++rep.generated_testcases;
    }
    std::uint64_t hit = 0;
    for (const auto& e : coverable)
      if (rep.covered.count(e)) ++hit;
    rep.branch_cov_percent =
        coverable.empty() ? 100.0
                          : 100.0 * double(hit) / double(coverable.size());
    bool all = true;
    for (const auto& e : rare)
      if (!rep.covered.count(e)) {
        all = false;
        break;
      }
    rep.outcome = all ? "all_covered" : "cutoff";
    std::string joined;
    for (const auto& ph : rep.phase_log) {
      if (!joined.empty()) joined += "-";
      joined += ph.label;
    }
    rep.phases = joined;
  };

  if (rare.empty()) {
    // The random batch already exercised everything worth chasing; it is
    // the final corpus.
    result.corpus = std::move(sim_cases);
    rep.total_testcases = result.corpus.size();
    finish(nullptr);
    return result;
  }

  FuzzEngine fuzz(dut, plan, sim_cases, rare,
                  Rng::derive_seed(config.rng_seed, kTagFuzz), config.jobs);
  ExecutionTree tree;
  const SymRange sym_all;  // no spans: every input byte is symbolic

  const std::uint32_t max_windows = 4 * std::max<std::uint32_t>(
                                            config.stall_window, 1);
  std::optional<clock::time_point> cutoff;
  if (!config.deterministic && config.time_cutoff_s)
    cutoff = campaign_start +
             std::chrono::duration_cast<clock::duration>(
                 std::chrono::duration<double>(*config.time_cutoff_s));
  auto past_cutoff = [&]() { return cutoff && clock::now() >= *cutoff; };

  std::uint32_t fuzz_phases = 0, conc_phases = 0;
  bool done = fuzz.rare_all_covered();

  while (!done && !past_cutoff()) {
    bool ran_any = false;

    if (fuzz_phases < config.max_fuzz_phases) {
      ++fuzz_phases;
      ran_any = true;
      PhaseLogEntry ph;
      ph.label = "fuzz" + std::to_string(fuzz_phases);
      const auto phase_start = clock::now();
      std::uint32_t quiet = 0;
      for (std::uint32_t w = 0; w < max_windows; ++w) {
        FuzzBudget budget;
        if (config.deterministic) {
          budget.max_execs = config.execs_per_threshold;
        } else {
          auto deadline =
              clock::now() + std::chrono::duration_cast<clock::duration>(
                                 std::chrono::duration<double>(
                                     config.time_threshold_fuzz_s));
          if (cutoff && *cutoff < deadline) deadline = *cutoff;
          budget.deadline = deadline;
        }
        const WindowStats ws = fuzz.run_window(budget);
        ph.execs += ws.execs;
        ph.new_rare_covered += ws.new_rare;
        ph.testcases_added += ws.admitted;
        if (fuzz.rare_all_covered()) {
          done = true;
          break;
        }
        if (past_cutoff()) break;
        if (ws.execs == 0) break;  // nothing runnable; don't spin
        quiet = (ws.admitted == 0 && ws.new_rare == 0) ? quiet + 1 : 0;
        if (quiet >= config.stall_window) break;
      }
      if (!config.deterministic)
        ph.duration_s =
            std::chrono::duration<double>(clock::now() - phase_start).count();
      rep.total_execs += ph.execs;
      rep.phase_log.push_back(std::move(ph));
    }
    if (done || past_cutoff()) break;

    if (conc_phases < config.max_conc_phases) {
      ++conc_phases;
      ran_any = true;
      PhaseLogEntry ph;
      ph.label = "conc" + std::to_string(conc_phases);
      const auto phase_start = clock::now();

      // Seed order: what taught the bitmap the most, first.
      std::vector<const QueueEntry*> order;
      order.reserve(fuzz.queue().entries.size());
      for (const auto& e : fuzz.queue().entries) order.push_back(&e);
      std::stable_sort(order.begin(), order.end(),
                       [](const QueueEntry* a, const QueueEntry* b) {
                         if (a->admission_novelty != b->admission_novelty)
                           return a->admission_novelty > b->admission_novelty;
                         return a->tc.id < b->tc.id;
                       });
      std::vector<TestCase> seeds;
      seeds.reserve(order.size());
      for (const QueueEntry* e : order) seeds.push_back(e->tc);

      ConcolicBudget budget;
      budget.per_solve = config.per_solve;
      budget.per_solve.rng_seed = Rng::derive_seed(
          config.rng_seed, kTagSolve + conc_phases);
      if (config.deterministic) {
        budget.max_solves = config.solves_per_threshold;
      } else {
        auto deadline =
            clock::now() + std::chrono::duration_cast<clock::duration>(
                               std::chrono::duration<double>(
                                   config.time_threshold_conc_s));
        if (cutoff && *cutoff < deadline) deadline = *cutoff;
        budget.deadline = deadline;
      }

      auto rare_hits = [&]() {
        std::uint32_t n = 0;
        for (const auto& e : rare)
          if (fuzz.covered().count(e)) ++n;
        return n;
      };
      const std::uint32_t rare_before = rare_hits();

      ConcolicEngine conc(dut, plan, sym_all, tree);
      std::vector<GeneratedCase> gen =
          conc.run(seeds, budget, rare, config.jobs);
      ph.solver_calls = conc.stats().solver_calls;
      ph.execs = seeds.size() + gen.size();  // shadow replays
      for (auto& g : gen) {
        // Cross-engine seeding: concolic output enters the fuzz queue
        // unconditionally and re-executes there, updating shared coverage.
        fuzz.add_case(std::move(g.tc));
        ++ph.testcases_added;
      }
      // New rare arms are counted by what the fuzz-side replays confirmed.
      ph.new_rare_covered = rare_hits() - rare_before;
      if (!config.deterministic)
        ph.duration_s =
            std::chrono::duration<double>(clock::now() - phase_start).count();
      rep.total_execs += ph.execs;
      rep.solver_calls += ph.solver_calls;
      rep.phase_log.push_back(std::move(ph));
      done = fuzz.rare_all_covered();
    }

    if (!ran_any) break;  // both phase budgets exhausted
  }

  finish(&fuzz);
  return result;
}

std::string campaign_report_to_json(const CampaignReport& rep) {
  nlohmann::json j;
  j["dut_name"] = rep.dut_name;
  auto edges = [](const std::set<BranchEdge>& s) {
    std::vector<std::string> v;
    v.reserve(s.size());
    for (const auto& e : s) v.push_back(to_string(e));
    return v;
  };
  j["rare_targets"] = edges(rep.rare_targets);
  j["covered"] = edges(rep.covered);
  j["phases"] = rep.phases;
  j["outcome"] = rep.outcome;
  j["branch_cov_percent"] = rep.branch_cov_percent;
  j["total_testcases"] = rep.total_testcases;
  j["generated_testcases"] = rep.generated_testcases;
  j["total_execs"] = rep.total_execs;
  j["solver_calls"] = rep.solver_calls;
  j["instrumented_blocks"] = rep.instrumented_blocks;
  j["total_blocks"] = rep.total_blocks;
  j["phase_log"] = nlohmann::json::array();
  for (const auto& ph : rep.phase_log) {
    nlohmann::json e;
    e["label"] = ph.label;
    e["duration_s"] = ph.duration_s;
    e["execs"] = ph.execs;
    e["solver_calls"] = ph.solver_calls;
    e["new_rare_covered"] = ph.new_rare_covered;
    e["testcases_added"] = ph.testcases_added;
    j["phase_log"].push_back(std::move(e));
  }
  return j.dump(2);
}

}  // namespace raretrig
