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

#include "raretrig/detector.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace raretrig {

namespace {

void append_u16(std::vector<std::uint8_t>& v, std::uint16_t x) {
  v.push_back(static_cast<std::uint8_t>(x & 0xff));
  v.push_back(static_cast<std::uint8_t>(x >> 8));
}

void append_u64(std::vector<std::uint8_t>& v, std::uint64_t x) {
  for (int i = 0; i < 8; ++i)
    v.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

}  // namespace

Digest lut_input_key(const GoldenLut& lut,
                     const std::vector<std::uint8_t>& bytes) {
  std::vector<std::uint8_t> buf(lut.salt.begin(), lut.salt.end());
  buf.insert(buf.end(), bytes.begin(), bytes.end());
  return sha256(buf);
}

Digest lut_output_key(const GoldenLut& lut, const Dut& dut,
                      const std::vector<std::uint64_t>& outputs) {
  // Width byte then big-endian value bytes per output; the width byte keeps
  // e.g. (w=8, 0x01) and (w=16, 0x0001) from colliding.
  std::vector<std::uint8_t> buf(lut.salt.begin(), lut.salt.end());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const unsigned w =
        i < dut.outputs.size() ? dut.outputs[i].width : 64;
    const unsigned nb = (w + 7) / 8;
    buf.push_back(static_cast<std::uint8_t>(w));
    for (unsigned b = 0; b < nb; ++b)
      buf.push_back(
          static_cast<std::uint8_t>(outputs[i] >> (8 * (nb - 1 - b))));
  }
  return sha256(buf);
}

Result<GoldenLut, NonHaltingError> build_lut(
    const Dut& reference, const InstrumentationPlan& plan,
    const std::vector<TestCase>& testcases,
    const std::array<std::uint8_t, 16>& salt) {
  GoldenLut lut;
  lut.salt = salt;
  NonHaltingError err;
  for (const TestCase& tc : testcases) {
    auto r = execute(reference, tc, plan);
    if (!r.ok() || r.value().terminated_by != Trace::End::kHalt) {
      err.ids.push_back(tc.id);
      continue;
    }
    lut.entries[lut_input_key(lut, tc.bytes)] =
        lut_output_key(lut, reference, r.value().outputs);
  }
  if (!err.ids.empty()) {
    err.message = std::to_string(err.ids.size()) +
                  " test case(s) did not halt on the reference design";
    return err;
  }
  return lut;
}

const char* verdict_tag(const Verdict& v) {
  switch (v.kind) {
    case Verdict::Kind::kClean:
      return "clean";
    case Verdict::Kind::kTrojanDetected:
      return v.non_halting ? "trojan(non-halting)" : "trojan";
    case Verdict::Kind::kNotInLut:
      return "not-in-lut";
  }
  return "?";
}

Verdict detect(const Dut& suspect, const InstrumentationPlan& plan,
               const GoldenLut& lut, const TestCase& tc) {
  // Membership first: if the golden table has never seen this input, the
  // suspect is not even run. A hang on an unknown input proves nothing.
  const Digest key = lut_input_key(lut, tc.bytes);
  auto it = lut.entries.find(key);
  if (it == lut.entries.end()) return {Verdict::Kind::kNotInLut, false};

  auto r = execute(suspect, tc, plan);
  if (!r.ok() || r.value().terminated_by != Trace::End::kHalt)
    return {Verdict::Kind::kTrojanDetected, true};
  const Digest got = lut_output_key(lut, suspect, r.value().outputs);
  if (got != it->second) return {Verdict::Kind::kTrojanDetected, false};
  return {Verdict::Kind::kClean, false};
}

DetectionReport detect_all(const Dut& suspect, const InstrumentationPlan& plan,
                           const GoldenLut& lut,
                           const std::vector<TestCase>& testcases) {
  DetectionReport rep;
  for (const TestCase& tc : testcases) {
    const Verdict v = detect(suspect, plan, lut, tc);
    rep.verdicts.emplace_back(tc.id, v);
    if (v.kind == Verdict::Kind::kTrojanDetected) {
      if (!rep.trojan_found) rep.first_detecting_case = tc.id;
      rep.trojan_found = true;
    } else if (v.kind == Verdict::Kind::kNotInLut) {
      ++rep.not_in_lut;
    }
  }
  return rep;
}

std::string detection_report_to_json(const DetectionReport& rep) {
  nlohmann::json j;
  j["trojan_found"] = rep.trojan_found;
  if (rep.first_detecting_case)
    j["first_detecting_case"] = *rep.first_detecting_case;
  else
    j["first_detecting_case"] = nullptr;
  j["not_in_lut"] = rep.not_in_lut;
  j["cases"] = nlohmann::json::array();
  for (const auto& [id, v] : rep.verdicts) {
    nlohmann::json e;
    e["id"] = id;
    e["verdict"] = verdict_tag(v);
    j["cases"].push_back(std::move(e));
  }
  return j.dump(2);
}

void save_lut(const GoldenLut& lut, const std::string& path) {
  std::vector<std::uint8_t> buf;
  buf.reserve(4 + 2 + 2 + 16 + 8 + lut.entries.size() * 64);
  buf.insert(buf.end(), {'G', 'L', 'U', 'T'});
  append_u16(buf, 1);  // format version
  append_u16(buf, 1);  // digest algorithm: SHA-256
  buf.insert(buf.end(), lut.salt.begin(), lut.salt.end());
  append_u64(buf, lut.entries.size());
  // std::map iteration is already digest-sorted.
  for (const auto& [in, out] : lut.entries) {
    buf.insert(buf.end(), in.begin(), in.end());
    buf.insert(buf.end(), out.begin(), out.end());
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  if (!f) throw std::runtime_error("short write: " + path);
}

Result<GoldenLut, std::string> load_lut(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return std::string("cannot open: " + path);
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(f)),
                                std::istreambuf_iterator<char>());
  if (buf.size() < 32) return std::string("truncated LUT header");
  if (buf[0] != 'G' || buf[1] != 'L' || buf[2] != 'U' || buf[3] != 'T')
    return std::string("bad magic (not a GLUT file)");
  const std::uint16_t version = buf[4] | (std::uint16_t(buf[5]) << 8);
  const std::uint16_t alg = buf[6] | (std::uint16_t(buf[7]) << 8);
  if (version != 1) return std::string("unsupported LUT version");
  if (alg != 1) return std::string("unsupported digest algorithm");
  GoldenLut lut;
  std::copy(buf.begin() + 8, buf.begin() + 24, lut.salt.begin());
  std::uint64_t count = 0;
  for (int i = 0; i < 8; ++i) count |= std::uint64_t(buf[24 + i]) << (8 * i);
  const std::size_t need = 32 + count * 64;
  if (buf.size() != need) return std::string("entry count does not match size");
  std::size_t pos = 32;
  for (std::uint64_t i = 0; i < count; ++i) {
    Digest in{}, out{};
    std::copy(buf.begin() + pos, buf.begin() + pos + 32, in.begin());
    std::copy(buf.begin() + pos + 32, buf.begin() + pos + 64, out.begin());
    lut.entries.emplace(in, out);
    pos += 64;
  }
  return lut;
}

}  // namespace raretrig
