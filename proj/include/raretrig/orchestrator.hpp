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

#ifndef RARETRIG_ORCHESTRATOR_HPP_
#define RARETRIG_ORCHESTRATOR_HPP_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "raretrig/concolic.hpp"
#include "raretrig/dut.hpp"
#include "raretrig/fuzz.hpp"
#include "raretrig/instrument.hpp"

namespace raretrig {

struct CampaignConfig {
  std::uint64_t rng_seed = 0;
  // Phase-count bounds: at most this many fuzz / concolic phases.
  std::uint32_t max_fuzz_phases = 5;
  std::uint32_t max_conc_phases = 5;
  // Random simulation batch used to identify rare branch arms.
  std::uint32_t random_sim_cases = 16;
  // Stall detection: a phase ends after this many consecutive windows with
  // no novel admission and no new rare arm.
  std::uint32_t stall_window = 5;
  // Deterministic mode sizes windows by work counts instead of wall time and
  // keeps every reported number a pure function of the inputs.
  bool deterministic = true;
  std::uint64_t execs_per_threshold = 50000;  // fuzz window (deterministic)
  std::uint64_t solves_per_threshold = 64;    // concolic window (deterministic)
  double time_threshold_fuzz_s = 5.0;         // fuzz window (wall mode)
  double time_threshold_conc_s = 10.0;        // concolic window (wall mode)
  std::optional<double> time_cutoff_s;        // whole-campaign cap (wall mode)
  bool selective = true;                      // instrument selectively
  unsigned jobs = 1;
  SolveBudget per_solve;
};

struct PhaseLogEntry {
  std::string label;            // "fuzz1", "conc2", ...
  double duration_s = 0.0;      // 0 in deterministic mode
  std::uint64_t execs = 0;      // interpreter runs (fuzz) / replays (conc)
  std::uint64_t solver_calls = 0;
  std::uint32_t new_rare_covered = 0;
  std::uint64_t testcases_added = 0;
};

struct CampaignReport {
  std::string dut_name;
  std::set<BranchEdge> rare_targets;
  std::set<BranchEdge> covered;  // all arms seen (sim + fuzz + concolic)
  std::vector<PhaseLogEntry> phase_log;
  std::string phases;  // "fuzz1-conc1-fuzz2..." (phases actually run)
  std::string outcome;  // "all_covered" | "cutoff"
  double branch_cov_percent = 0.0;
  std::uint64_t total_testcases = 0;      // final corpus size
  std::uint64_t generated_testcases = 0;  // corpus minus random seeds
  std::uint64_t total_execs = 0;
  std::uint64_t solver_calls = 0;
  std::uint32_t instrumented_blocks = 0;
  std::uint32_t total_blocks = 0;
};

struct CampaignResult {
  CampaignReport report;
  std::vector<TestCase> corpus;  // final queue, id order
};

// Random simulation: executes `config.random_sim_cases` random cases of
// max_cycles frames each and returns every branch arm they never took,
// minus arms declared unreachable in the DUT source.
std::set<BranchEdge> identify_rare_targets(const Dut& dut,
                                           const InstrumentationPlan& plan,
                                           const CampaignConfig& config);

// The exact plan run_campaign(dut, config) would instrument under (labels
// included); re-runs the random sim when config.selective. For tooling.
InstrumentationPlan campaign_plan(const Dut& dut, const CampaignConfig& config);

// Full pipeline: random sim -> rare targets -> selective instrumentation ->
// alternating fuzz/concolic phases with cross-engine seeding, until every
// rare arm is covered or budgets run out.
CampaignResult run_campaign(const Dut& dut, const CampaignConfig& config);

std::string campaign_report_to_json(const CampaignReport& report);

}  // namespace raretrig

#endif  // RARETRIG_ORCHESTRATOR_HPP_
