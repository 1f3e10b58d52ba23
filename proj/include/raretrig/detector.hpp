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

#ifndef RARETRIG_DETECTOR_HPP_
#define RARETRIG_DETECTOR_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "raretrig/digest.hpp"
#include "raretrig/dut.hpp"
#include "raretrig/instrument.hpp"
#include "raretrig/result.hpp"

namespace raretrig {

// Golden response table: salted input digest -> salted output digest, built
// from a trusted reference design. Digests rather than raw vectors so the
// table leaks nothing about the reference behavior beyond membership.
struct GoldenLut {
  std::array<std::uint8_t, 16> salt{};
  std::map<Digest, Digest> entries;

  std::size_t size() const { return entries.size(); }
};

// salt || raw test-case bytes, hashed.
Digest lut_input_key(const GoldenLut& lut, const std::vector<std::uint8_t>& bytes);
// salt || per-output (width byte, big-endian value bytes), hashed.
Digest lut_output_key(const GoldenLut& lut, const Dut& dut,
                      const std::vector<std::uint64_t>& outputs);

struct NonHaltingError {
  // Test-case ids whose reference execution did not halt (or failed).
  std::vector<std::uint64_t> ids;
  std::string message;
};

// Runs every test case on the trusted reference and records digest pairs.
// Any non-halting reference run aborts the build: a golden table must not
// have holes the detector would misread.
Result<GoldenLut, NonHaltingError> build_lut(
    const Dut& reference, const InstrumentationPlan& plan,
    const std::vector<TestCase>& testcases,
    const std::array<std::uint8_t, 16>& salt);

struct Verdict {
  enum class Kind : std::uint8_t { kClean, kTrojanDetected, kNotInLut };
  Kind kind = Kind::kClean;
  // Set when detection came from the suspect failing to halt on a known
  // input (timeout/budget instead of output mismatch).
  bool non_halting = false;
};

const char* verdict_tag(const Verdict& v);

// Checks one test case: unknown input -> kNotInLut (the LUT cannot speak to
// it, even if the suspect would misbehave); known input -> run the suspect;
// non-halting or output-digest mismatch -> kTrojanDetected.
Verdict detect(const Dut& suspect, const InstrumentationPlan& plan,
               const GoldenLut& lut, const TestCase& tc);

struct DetectionReport {
  std::vector<std::pair<std::uint64_t, Verdict>> verdicts;  // id, verdict
  bool trojan_found = false;
  std::optional<std::uint64_t> first_detecting_case;
  std::uint32_t not_in_lut = 0;
};

DetectionReport detect_all(const Dut& suspect, const InstrumentationPlan& plan,
                           const GoldenLut& lut,
                           const std::vector<TestCase>& testcases);

std::string detection_report_to_json(const DetectionReport& report);

// Binary LUT file: magic "GLUT", u16 version=1, u16 alg id (1 = SHA-256),
// 16-byte salt, u64 entry count, then count sorted (input digest, output
// digest) pairs. All integers little-endian.
void save_lut(const GoldenLut& lut, const std::string& path);
Result<GoldenLut, std::string> load_lut(const std::string& path);

}  // namespace raretrig

#endif  // RARETRIG_DETECTOR_HPP_
