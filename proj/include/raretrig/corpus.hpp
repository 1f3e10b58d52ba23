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

#ifndef RARETRIG_CORPUS_HPP_
#define RARETRIG_CORPUS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "raretrig/dut.hpp"
#include "raretrig/result.hpp"

namespace raretrig {

enum class TrojanType : std::uint8_t {
  kNone,  // clean design (no twin pair semantics)
  kCwom,  // combinational trigger, combinational payload
  kCwm,   // combinational trigger, sequential (latched) payload
  kSwom,  // sequential trigger, combinational payload
  kSwm,   // sequential trigger, sequential payload
};

const char* trojan_type_tag(TrojanType t);
Result<TrojanType, std::string> trojan_type_from_tag(const std::string& tag);

// Machine-readable trigger description: the exact frames that activate the
// trojan when fed on consecutive cycles, plus a neutral frame for padding
// runs out to the halt cycle.
struct TriggerInfo {
  std::vector<std::vector<std::uint8_t>> frames;
  std::vector<std::uint8_t> neutral_frame;
  std::string description;
};

struct CorpusEntry {
  std::string name;
  std::string dut_file;                    // relative to the corpus dir
  std::optional<std::string> clean_file;   // trojan-free twin, if trojaned
  TrojanType trojan_type = TrojanType::kNone;
  std::uint32_t rare_targets = 0;          // under campaign_seed random sim
  std::optional<TriggerInfo> trigger;
  std::uint64_t campaign_seed = 0;
  std::optional<std::string> lut_file;     // committed golden LUT
  std::optional<std::string> vectors_dir;  // committed detection vectors
  std::optional<std::string> reduced_of;   // full-width sibling, if reduced
  std::uint32_t input_bits_total = 0;      // sum of input widths x cycles
};

// Reads corpus/manifest.json. Throws std::runtime_error on IO/format errors.
std::vector<CorpusEntry> corpus_manifest(const std::string& corpus_dir);

std::optional<CorpusEntry> find_entry(const std::vector<CorpusEntry>& entries,
                                      const std::string& name);

// Corpus dir resolution: explicit path if nonempty, else $RARETRIG_CORPUS,
// else "./corpus".
std::string resolve_corpus_dir(const std::string& explicit_dir);

Dut load_dut_file(const std::string& path);  // throws on parse failure

// Builds the activating test case from a trigger description: trigger frames
// followed by neutral-frame padding up to `total_cycles` frames.
TestCase trigger_testcase(const TriggerInfo& trigger,
                          std::uint32_t total_cycles);

// On-disk test cases: tc_<id>_<origin>.bin under a directory.
void save_testcases(const std::string& dir,
                    const std::vector<TestCase>& testcases);
std::vector<TestCase> load_testcases(const std::string& dir);

}  // namespace raretrig

#endif  // RARETRIG_CORPUS_HPP_
