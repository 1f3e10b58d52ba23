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

#include "raretrig/fuzz.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace raretrig {

// ---------------------------------------------------------------------------
// Energy schedule
// ---------------------------------------------------------------------------

std::uint32_t calculate_energy(const TestCase& tc, const QueueMedians& med) {
  // Factors double the baseline for fast, well-covering, deep seeds. An
  // empty queue treats every comparison as satisfied.
  const bool a = med.empty || tc.exec_time <= med.exec_time;
  const bool b = med.empty || tc.bitmap_count >= med.bitmap_count;
  const bool c = med.empty || tc.depth >= med.depth;
  std::uint32_t k = 16;
  if (a) k *= 2;
  if (b) k *= 2;
  if (c) k *= 2;
  return std::clamp<std::uint32_t>(k, 16, 128);
}

// ---------------------------------------------------------------------------
// Mutations
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint8_t kInterestingBytes[5] = {0x00, 0x01, 0x7f, 0x80, 0xff};
constexpr std::uint16_t kInterestingWords16[4] = {0x0000, 0x7fff, 0x8000,
                                                  0xffff};
constexpr std::uint32_t kInterestingWords32[4] = {0x00000000, 0x7fffffff,
                                                  0x80000000, 0xffffffff};

std::uint64_t det_counts(std::size_t len, std::uint64_t out[6]) {
  out[0] = 8 * len;                      // single-bit flips, LSB first
  out[1] = len;                          // byte flips (XOR 0xFF)
  out[2] = 32 * len;                     // +-1..16 per byte, wrapping
  out[3] = 5 * len;                      // interesting byte constants
  out[4] = len >= 2 ? (len / 2) * 4 : 0; // interesting LE 16-bit words
  out[5] = len >= 4 ? (len / 4) * 4 : 0; // interesting LE 32-bit words
  return out[0] + out[1] + out[2] + out[3] + out[4] + out[5];
}

void apply_det(std::vector<std::uint8_t>& b, std::uint64_t ix) {
  std::uint64_t c[6];
  det_counts(b.size(), c);
  if (ix < c[0]) {
    b[ix / 8] ^= static_cast<std::uint8_t>(1u << (ix % 8));
    return;
  }
  ix -= c[0];
  if (ix < c[1]) {
    b[ix] ^= 0xff;
    return;
  }
  ix -= c[1];
  if (ix < c[2]) {
    const std::size_t pos = ix / 32;
    const std::uint64_t v = ix % 32;
    // Per byte: +1, -1, +2, -2, ..., +16, -16.
    const std::uint8_t delta = static_cast<std::uint8_t>(v / 2 + 1);
    if (v % 2 == 0)
      b[pos] = static_cast<std::uint8_t>(b[pos] + delta);
    else
      b[pos] = static_cast<std::uint8_t>(b[pos] - delta);
    return;
  }
  ix -= c[2];
  if (ix < c[3]) {
    b[ix / 5] = kInterestingBytes[ix % 5];
    return;
  }
  ix -= c[3];
  if (ix < c[4]) {
    const std::size_t pos = (ix / 4) * 2;  // aligned 16-bit slots
    const std::uint16_t w = kInterestingWords16[ix % 4];
    b[pos] = static_cast<std::uint8_t>(w & 0xff);
    b[pos + 1] = static_cast<std::uint8_t>(w >> 8);
    return;
  }
  ix -= c[4];
  const std::size_t pos = (ix / 4) * 4;  // aligned 32-bit slots
  const std::uint32_t w = kInterestingWords32[ix % 4];
  for (unsigned k = 0; k < 4; ++k)
    b[pos + k] = static_cast<std::uint8_t>((w >> (8 * k)) & 0xff);
}

void apply_havoc(std::vector<std::uint8_t>& b, Rng& rng,
                 std::size_t frame_bytes, std::size_t seed_len) {
  // Length bounds: at least one frame, at most 4x the seed.
  const std::size_t unit = frame_bytes == 0 ? 1 : frame_bytes;
  const std::size_t min_len = unit;
  const std::size_t max_len = std::max<std::size_t>(4 * seed_len, unit);

  const std::uint32_t ops = static_cast<std::uint32_t>(rng.below(32)) + 1;
  for (std::uint32_t i = 0; i < ops; ++i) {
    switch (rng.below(5)) {
      case 0: {  // flip one bit
        if (b.empty()) break;
        const std::uint64_t pos = rng.below(b.size() * 8);
        b[pos / 8] ^= static_cast<std::uint8_t>(1u << (pos % 8));
        break;
      }
      case 1: {  // overwrite one byte
        if (b.empty()) break;
        b[rng.below(b.size())] = rng.next_byte();
        break;
      }
      case 2: {  // wrapping +-1..16 on an LE 16-bit word
        if (b.size() < 2) break;
        const std::size_t pos = rng.below(b.size() - 1);
        std::uint16_t w = static_cast<std::uint16_t>(
            b[pos] | (static_cast<std::uint16_t>(b[pos + 1]) << 8));
        const std::uint16_t delta =
            static_cast<std::uint16_t>(rng.below(16) + 1);
        w = rng.below(2) ? static_cast<std::uint16_t>(w - delta)
                         : static_cast<std::uint16_t>(w + delta);
        b[pos] = static_cast<std::uint8_t>(w & 0xff);
        b[pos + 1] = static_cast<std::uint8_t>(w >> 8);
        break;
      }
      case 3: {  // clone a frame-aligned subsequence
        if (b.size() < unit) break;
        const std::size_t units = b.size() / unit;
        const std::size_t src = rng.below(units);
        std::size_t count = rng.below(units - src) + 1;
        // Respect the 4x-seed ceiling by trimming the clone.
        const std::size_t room =
            b.size() >= max_len ? 0 : (max_len - b.size()) / unit;
        count = std::min(count, room);
        if (count == 0) break;
        const std::size_t at = rng.below(units + 1);
        std::vector<std::uint8_t> chunk(b.begin() + src * unit,
                                        b.begin() + (src + count) * unit);
        b.insert(b.begin() + at * unit, chunk.begin(), chunk.end());
        break;
      }
      case 4: {  // delete a frame-aligned subsequence
        const std::size_t units = b.size() / unit;
        if (units < 2 || b.size() <= min_len) break;
        const std::size_t src = rng.below(units);
        std::size_t count = rng.below(units - src) + 1;
        count = std::min(count, units - 1);  // keep at least one frame
        if (count == 0) break;
        b.erase(b.begin() + src * unit, b.begin() + (src + count) * unit);
        break;
      }
    }
  }
}

}  // namespace

std::uint64_t det_mutation_count(std::size_t len) {
  std::uint64_t c[6];
  return det_counts(len, c);
}

TestCase mutate(const TestCase& seed, const MutationStage& stage, Rng& rng,
                std::size_t frame_bytes) {
  TestCase tc;
  tc.bytes = seed.bytes;
  tc.origin = TestCase::Origin::kFuzz;
  tc.depth = seed.depth + 1;
  if (stage.kind == MutationStage::Kind::kDeterministic) {
    apply_det(tc.bytes, stage.det_index);
  } else {
    apply_havoc(tc.bytes, rng, frame_bytes, seed.bytes.size());
  }
  return tc;
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

FuzzEngine::FuzzEngine(const Dut& dut, const InstrumentationPlan& plan,
                       std::vector<TestCase> seeds, std::set<BranchEdge> rare,
                       std::uint64_t rng_seed, unsigned jobs)
    : dut_(dut),
      plan_(plan),
      rare_(std::move(rare)),
      rng_(rng_seed),
      jobs_(jobs == 0 ? 1 : jobs),
      pending_seeds_(std::move(seeds)) {}

bool FuzzEngine::rare_all_covered() const {
  for (const auto& e : rare_)
    if (!queue_.covered.count(e)) return false;
  return true;
}

QueueMedians FuzzEngine::medians() const {
  QueueMedians m;
  if (queue_.entries.empty()) return m;
  m.empty = false;
  std::vector<std::uint64_t> v;
  v.reserve(queue_.entries.size());
  auto lower_median = [&](auto get) {
    v.clear();
    for (const auto& e : queue_.entries) v.push_back(get(e.tc));
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
  };
  m.exec_time = lower_median([](const TestCase& t) { return t.exec_time; });
  m.bitmap_count =
      lower_median([](const TestCase& t) { return std::uint64_t(t.bitmap_count); });
  m.depth = lower_median([](const TestCase& t) { return std::uint64_t(t.depth); });
  return m;
}

std::vector<TestCase> FuzzEngine::testcases() const {
  std::vector<TestCase> out;
  out.reserve(queue_.entries.size());
  for (const auto& e : queue_.entries) out.push_back(e.tc);
  return out;
}

bool FuzzEngine::commit(TestCase tc, bool as_seed,
                        Result<Trace, ExecError> res, WindowStats& w) {
  ++queue_.stats.execs;
  ++w.execs;
  if (!res.ok()) {
    ++queue_.stats.exec_errors;
    if (as_seed) {
      // A seed that cannot run stays in the queue (callers own the seed
      // set), it just never earns energy factors.
      tc.id = next_id_++;
      queue_.entries.push_back(QueueEntry{std::move(tc), true, 0, false});
    }
    return false;
  }
  const Trace& tr = res.value();

  std::uint32_t new_rare = 0;
  for (const auto& [site, taken] : tr.branch_events) {
    BranchEdge e{site, taken ? Arm::kThen : Arm::kElse};
    if (queue_.covered.insert(e).second && rare_.count(e)) ++new_rare;
  }
  if (new_rare) {
    w.new_rare += new_rare;
    queue_.stats.last_rare_progress_at = queue_.stats.execs;
  }

  const NoveltyResult nov = absorb(bitmap_, tr, plan_);
  const std::uint64_t novelty =
      std::uint64_t(nov.new_cells) + std::uint64_t(nov.new_buckets);
  if (novelty) queue_.stats.last_novelty_at = queue_.stats.execs;

  // Interesting == new bitmap structure or a branch arm nobody ever took.
  // Injected cases (as_seed) are admitted unconditionally: they seed the
  // next phase.
  if (!as_seed && novelty == 0 && new_rare == 0) return false;

  tc.id = next_id_++;
  tc.exec_time = tr.steps_run;
  tc.bitmap_count = nov.trace_cells;
  queue_.entries.push_back(
      QueueEntry{std::move(tc), as_seed, novelty, false});
  ++queue_.stats.admitted;
  ++w.admitted;
  return true;
}

bool FuzzEngine::exec_and_admit(TestCase tc, bool as_seed, WindowStats& w) {
  auto res = execute(dut_, tc, plan_);
  return commit(std::move(tc), as_seed, std::move(res), w);
}

void FuzzEngine::add_case(TestCase tc) {
  WindowStats scratch;
  exec_and_admit(std::move(tc), true, scratch);
}

WindowStats FuzzEngine::run_window(const FuzzBudget& budget) {
  WindowStats w;
  constexpr std::size_t kBatchCap = 128;

  auto budget_left = [&]() -> std::uint64_t {
    if (budget.deadline &&
        std::chrono::steady_clock::now() >= *budget.deadline)
      return 0;
    if (!budget.max_execs) return ~0ull;
    return *budget.max_execs > w.execs ? *budget.max_execs - w.execs : 0;
  };

  // Covering everything only terminates the loop when there was something
  // to look for; with no rare set the budget is the sole stop condition.
  auto done = [&]() { return !rare_.empty() && rare_all_covered(); };

  // Phase 0: pending seeds, in order.
  while (!pending_seeds_.empty() && budget_left() > 0) {
    TestCase tc = std::move(pending_seeds_.front());
    pending_seeds_.erase(pending_seeds_.begin());
    exec_and_admit(std::move(tc), true, w);
  }
  if (!pending_seeds_.empty()) return w;  // budget died mid-seed

  while (!done()) {
    const std::uint64_t left = budget_left();
    if (left == 0) break;
    if (queue_.entries.empty()) break;  // nothing to mutate

    if (cursor_ >= queue_.entries.size()) cursor_ = 0;
    // NOTE: this reference dies at the first commit below (push_back may
    // reallocate); everything taken from it is captured before execution.
    QueueEntry& e = queue_.entries[cursor_];
    const std::size_t seed_len = e.tc.bytes.size();

    // Build one batch entirely inside the current stage segment so energy
    // and medians are computed at the same points regardless of jobs.
    std::vector<TestCase> batch;
    if (!e.det_done) {
      const std::uint64_t total = det_mutation_count(seed_len);
      if (det_pos_ >= total) {
        e.det_done = true;
        det_pos_ = 0;
        havoc_left_ = calculate_energy(e.tc, medians());
        continue;
      }
      const std::uint64_t n =
          std::min({total - det_pos_, left, std::uint64_t(kBatchCap)});
      batch.reserve(n);
      for (std::uint64_t i = 0; i < n; ++i)
        batch.push_back(mutate(e.tc, {MutationStage::Kind::kDeterministic,
                                      det_pos_ + i},
                               rng_, dut_.frame_bytes));
      det_pos_ += n;
    } else if (havoc_left_ > 0) {
      const std::uint64_t n =
          std::min({std::uint64_t(havoc_left_), left,
                    std::uint64_t(kBatchCap)});
      batch.reserve(n);
      for (std::uint64_t i = 0; i < n; ++i)
        batch.push_back(mutate(e.tc, {MutationStage::Kind::kHavoc, 0}, rng_,
                               dut_.frame_bytes));
      havoc_left_ -= static_cast<std::uint32_t>(n);
    } else {
      // Visit over: move on. Entries seen before get a fresh havoc budget;
      // new admissions run their deterministic pass first.
      ++cursor_;
      if (cursor_ >= queue_.entries.size()) cursor_ = 0;
      det_pos_ = 0;
      QueueEntry& ne = queue_.entries[cursor_];
      if (ne.det_done) havoc_left_ = calculate_energy(ne.tc, medians());
      continue;
    }

    // Execute the batch (possibly in parallel), then commit results in
    // generation order so the outcome is independent of jobs.
    std::vector<Result<Trace, ExecError>> results;
    results.reserve(batch.size());
    if (jobs_ <= 1 || batch.size() < 2) {
      for (auto& tc : batch) results.push_back(execute(dut_, tc, plan_));
    } else {
      std::vector<std::optional<Result<Trace, ExecError>>> slots(batch.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= batch.size()) return;
          slots[i].emplace(execute(dut_, batch[i], plan_));
        }
      };
      std::vector<std::thread> threads;
      const unsigned n = std::min<unsigned>(jobs_, batch.size());
      threads.reserve(n);
      for (unsigned t = 0; t < n; ++t) threads.emplace_back(worker);
      for (auto& t : threads) t.join();
      for (auto& s : slots) results.push_back(std::move(*s));
    }

    for (std::size_t i = 0; i < batch.size(); ++i) {
      commit(std::move(batch[i]), false, std::move(results[i]), w);
      if (done()) break;  // leftover results are discarded, not counted
    }
  }
  return w;
}

FuzzQueue fuzz_loop(const Dut& dut, const InstrumentationPlan& plan,
                    const std::vector<TestCase>& seeds,
                    const FuzzBudget& budget, const std::set<BranchEdge>& rare,
                    std::uint64_t rng_seed, unsigned jobs) {
  if (budget.max_execs && *budget.max_execs == 0) {
    // Zero budget is a no-op by contract: hand the seeds back untouched.
    FuzzQueue q;
    for (const TestCase& s : seeds)
      q.entries.push_back(QueueEntry{s, true, 0, false});
    return q;
  }
  FuzzEngine eng(dut, plan, seeds, rare, rng_seed, jobs);
  eng.run_window(budget);
  return eng.queue();
}

}  // namespace raretrig
