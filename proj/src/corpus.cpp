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

#include "raretrig/corpus.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace raretrig {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::uint8_t> json_bytes(const nlohmann::json& j) {
  std::vector<std::uint8_t> out;
  for (const auto& e : j) out.push_back(e.get<std::uint8_t>());
  return out;
}

}  // namespace

const char* trojan_type_tag(TrojanType t) {
  switch (t) {
    case TrojanType::kNone: return "none";
    case TrojanType::kCwom: return "cwom";
    case TrojanType::kCwm: return "cwm";
    case TrojanType::kSwom: return "swom";
    case TrojanType::kSwm: return "swm";
  }
  return "none";
}

Result<TrojanType, std::string> trojan_type_from_tag(const std::string& tag) {
  if (tag == "none") return TrojanType::kNone;
  if (tag == "cwom") return TrojanType::kCwom;
  if (tag == "cwm") return TrojanType::kCwm;
  if (tag == "swom") return TrojanType::kSwom;
  if (tag == "swm") return TrojanType::kSwm;
  return std::string("unknown trojan type tag: " + tag);
}

std::vector<CorpusEntry> corpus_manifest(const std::string& corpus_dir) {
  const std::string path = corpus_dir + "/manifest.json";
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  std::vector<CorpusEntry> entries;
  try {
    for (const auto& je : j.at("entries")) {
      CorpusEntry e;
      e.name = je.at("name").get<std::string>();
      e.dut_file = je.at("dut_file").get<std::string>();
      if (je.contains("clean_file") && !je["clean_file"].is_null())
        e.clean_file = je["clean_file"].get<std::string>();
      auto tt = trojan_type_from_tag(je.at("trojan_type").get<std::string>());
      if (!tt.ok()) throw std::runtime_error(path + ": " + tt.error());
      e.trojan_type = tt.value();
      e.rare_targets = je.at("rare_targets").get<std::uint32_t>();
      if (je.contains("trigger") && !je["trigger"].is_null()) {
        TriggerInfo t;
        for (const auto& fr : je["trigger"].at("frames"))
          t.frames.push_back(json_bytes(fr));
        t.neutral_frame = json_bytes(je["trigger"].at("neutral_frame"));
        if (je["trigger"].contains("description"))
          t.description = je["trigger"]["description"].get<std::string>();
        e.trigger = std::move(t);
      }
      e.campaign_seed = je.at("campaign_seed").get<std::uint64_t>();
      if (je.contains("lut_file") && !je["lut_file"].is_null())
        e.lut_file = je["lut_file"].get<std::string>();
      if (je.contains("vectors_dir") && !je["vectors_dir"].is_null())
        e.vectors_dir = je["vectors_dir"].get<std::string>();
      if (je.contains("reduced_of") && !je["reduced_of"].is_null())
        e.reduced_of = je["reduced_of"].get<std::string>();
      e.input_bits_total = je.at("input_bits_total").get<std::uint32_t>();
      entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return entries;
}

std::optional<CorpusEntry> find_entry(const std::vector<CorpusEntry>& entries,
                                      const std::string& name) {
  for (const auto& e : entries)
    if (e.name == name) return e;
  return std::nullopt;
}

std::string resolve_corpus_dir(const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv("RARETRIG_CORPUS"); env && *env)
    return env;
  return "./corpus";
}

Dut load_dut_file(const std::string& path) {
  auto r = parse_dut(read_file(path));
  if (!r.ok())
    throw std::runtime_error(path + ":" + std::to_string(r.error().line) +
                             ": " + r.error().message);
  return std::move(r).value();
}

TestCase trigger_testcase(const TriggerInfo& trigger,
                          std::uint32_t total_cycles) {
  TestCase tc;
  tc.origin = TestCase::Origin::kUser;
  for (const auto& fr : trigger.frames)
    tc.bytes.insert(tc.bytes.end(), fr.begin(), fr.end());
  for (std::size_t i = trigger.frames.size(); i < total_cycles; ++i)
    tc.bytes.insert(tc.bytes.end(), trigger.neutral_frame.begin(),
                    trigger.neutral_frame.end());
  return tc;
}

void save_testcases(const std::string& dir,
                    const std::vector<TestCase>& testcases) {
  std::filesystem::create_directories(dir);
  for (const TestCase& tc : testcases) {
    const std::string path = dir + "/tc_" + std::to_string(tc.id) + "_" +
                             origin_tag(tc.origin) + ".bin";
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(tc.bytes.data()),
            static_cast<std::streamsize>(tc.bytes.size()));
    if (!f) throw std::runtime_error("short write: " + path);
  }
}

std::vector<TestCase> load_testcases(const std::string& dir) {
  std::vector<TestCase> out;
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error("not a directory: " + dir);
  std::vector<std::filesystem::path> files;
  for (const auto& de : std::filesystem::directory_iterator(dir)) {
    const std::string name = de.path().filename().string();
    if (name.size() > 7 && name.rfind("tc_", 0) == 0 &&
        name.substr(name.size() - 4) == ".bin")
      files.push_back(de.path());
  }
  // Directory iteration order is unspecified; name parsing restores ids, and
  // the id sort keeps downstream consumers deterministic.
  for (const auto& p : files) {
    const std::string stem = p.stem().string();  // tc_<id>_<origin>
    const std::size_t id_end = stem.find('_', 3);
    if (id_end == std::string::npos) continue;
    TestCase tc;
    tc.id = std::strtoull(stem.substr(3, id_end - 3).c_str(), nullptr, 10);
    auto origin = origin_from_tag(stem.substr(id_end + 1));
    if (!origin.ok()) continue;
    tc.origin = origin.value();
    const std::string data = read_file(p.string());
    tc.bytes.assign(data.begin(), data.end());
    out.push_back(std::move(tc));
  }
  std::sort(out.begin(), out.end(),
            [](const TestCase& a, const TestCase& b) { return a.id < b.id; });
  return out;
}

}  // namespace raretrig
