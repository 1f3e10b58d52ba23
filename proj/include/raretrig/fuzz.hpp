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

#ifndef RARETRIG_FUZZ_HPP_
#define RARETRIG_FUZZ_HPP_

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "raretrig/coverage.hpp"
#include "raretrig/dut.hpp"
#include "raretrig/instrument.hpp"
#include "raretrig/rng.hpp"

namespace raretrig {

// Queue medians used by the energy schedule; computed over the live queue
// (lower median for even counts). An empty queue treats every comparison as
// satisfied.
struct QueueMedians {
  bool empty = true;
  std::uint64_t exec_time = 0;
  std::uint64_t bitmap_count = 0;
  std::uint64_t depth = 0;
};

// Havoc trials for one seed: 16 * 2^a * 2^b * 2^c clamped to [16, 128],
// where a = exec_time <= median, b = bitmap_count >= median, c = depth >=
// median. Fast, well-covering, deep seeds get more air time.
std::uint32_t calculate_energy(const TestCase& tc, const QueueMedians& med);

// Mutation stages. Deterministic stages enumerate, in order: bit flips
// (LSB-first), byte flips (XOR 0xFF), arithmetic +-1..16 per byte (wrapping),
// interesting byte constants {0,1,0x7F,0x80,0xFF}, interesting 16-bit words
// {0,0x7FFF,0x8000,0xFFFF} (aligned, little-endian), and their 32-bit
// analogues {0, 0x7FFFFFFF, 0x80000000, 0xFFFFFFFF}.
struct MutationStage {
  enum class Kind : std::uint8_t { kDeterministic, kHavoc };
  Kind kind = Kind::kHavoc;
  std::uint64_t det_index = 0;  // which deterministic mutant (kDeterministic)
};

// Number of deterministic mutants for a seed of `len` bytes.
std::uint64_t det_mutation_count(std::size_t len);

// Applies one mutation. Deterministic stages ignore `rng` and are pure in
// (seed bytes, det_index). Havoc applies 1..32 random ops; clone/delete move
// whole frames so mutants stay frame-aligned, and lengths are clamped to
// [1 frame, 4 x seed length]. frame_bytes == 0 means free-form lengths.
TestCase mutate(const TestCase& seed, const MutationStage& stage, Rng& rng,
                std::size_t frame_bytes);

struct QueueEntry {
  TestCase tc;
  bool is_seed = false;             // initial seed or cross-engine injection
  std::uint64_t admission_novelty = 0;  // new_cells + new_buckets at admission
  bool det_done = false;            // deterministic stages exhausted
};

struct FuzzStats {
  std::uint64_t execs = 0;
  std::uint64_t admitted = 0;
  std::uint64_t exec_errors = 0;
  std::uint64_t last_novelty_at = 0;        // exec count at last admission
  std::uint64_t last_rare_progress_at = 0;  // exec count at last new rare arm
};

struct FuzzQueue {
  std::vector<QueueEntry> entries;
  FuzzStats stats;
  std::set<BranchEdge> covered;  // every branch arm seen by any execution
};

struct FuzzBudget {
  std::optional<std::uint64_t> max_execs;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct WindowStats {
  std::uint64_t execs = 0;
  std::uint64_t admitted = 0;
  std::uint32_t new_rare = 0;
};

// Incremental coverage-guided fuzzer. Owns the queue, global bitmap and
// covered-arm set; the campaign drives it in windows and injects concolic
// cases between phases. Executions and admissions happen in a canonical
// order, so results are a pure function of (dut, plan, seeds, rare, seed).
class FuzzEngine {
 public:
  FuzzEngine(const Dut& dut, const InstrumentationPlan& plan,
             std::vector<TestCase> seeds, std::set<BranchEdge> rare,
             std::uint64_t rng_seed, unsigned jobs = 1);

  // Runs until the budget is exhausted or every rare arm is covered.
  // Returns what changed during this window.
  WindowStats run_window(const FuzzBudget& budget);

  // Admits an externally generated case (executes it once, absorbs
  // coverage). Used for concolic outputs at phase boundaries.
  void add_case(TestCase tc);

  bool rare_all_covered() const;
  const FuzzQueue& queue() const { return queue_; }
  const std::set<BranchEdge>& covered() const { return queue_.covered; }
  const CoverageBitmap& bitmap() const { return bitmap_; }
  const std::set<BranchEdge>& rare() const { return rare_; }
  std::uint64_t execs() const { return queue_.stats.execs; }

  std::vector<TestCase> testcases() const;  // queue snapshot, id order

 private:
  QueueMedians medians() const;
  // Folds one executed case into the engine state (coverage, rare arms,
  // queue admission). Commit order defines the canonical result.
  bool commit(TestCase tc, bool as_seed, Result<Trace, ExecError> res,
              WindowStats& w);
  bool exec_and_admit(TestCase tc, bool as_seed, WindowStats& w);

  const Dut& dut_;
  const InstrumentationPlan& plan_;
  std::set<BranchEdge> rare_;
  CoverageBitmap bitmap_;
  FuzzQueue queue_;
  Rng rng_;
  unsigned jobs_;
  std::uint64_t next_id_ = 1;
  // Round-robin cursor + in-progress stage for the current queue entry.
  std::size_t cursor_ = 0;
  std::uint64_t det_pos_ = 0;
  std::uint32_t havoc_left_ = 0;
  std::vector<TestCase> pending_seeds_;
};

// One-shot fuzzing loop: seeds the engine, runs until the budget runs out or
// all rare arms are covered, returns the final queue. With max_execs == 0
// the seeds are returned unchanged (not even executed).
FuzzQueue fuzz_loop(const Dut& dut, const InstrumentationPlan& plan,
                    const std::vector<TestCase>& seeds,
                    const FuzzBudget& budget, const std::set<BranchEdge>& rare,
                    std::uint64_t rng_seed, unsigned jobs = 1);

}  // namespace raretrig

#endif  // RARETRIG_FUZZ_HPP_
