// End-to-end checks of the command-line binary: exit-code discipline
// (0 = goal met, 1 = goal missed, 2 = usage/input error), report JSON
// shapes, and bit-identical reruns. The binary path and the source-tree
// corpus come in through compile definitions.

#include <sys/wait.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"

#include <nlohmann/json.hpp>

using nlohmann::json;

namespace {

const std::string kCli = RARETRIG_CLI_PATH;
const std::string kCorpusDir = RARETRIG_CORPUS_DIR;

std::string design(const char* name) {
  return kCorpusDir + "/designs/" + name + ".dut";
}

struct CliRun {
  int exit_code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = kCli + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int status = pclose(p);
  CliRun r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = std::move(out);
  return r;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(bool(f));
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const char* tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("raretrig_cli_" + std::to_string(++counter) + "_" + tag);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

// Directory contents as (filename, bytes), sorted — for byte-exact
// comparison of two saved vector sets.
std::vector<std::pair<std::string, std::string>> dir_image(
    const std::filesystem::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& de : std::filesystem::directory_iterator(dir))
    out.emplace_back(de.path().filename().string(), read_file(de.path()));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("help, version, and usage errors") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("--help").out.find("campaign") != std::string::npos);
  CHECK(run_cli("--version").out.find("raretrig") != std::string::npos);

  CHECK(run_cli("").exit_code == 2);               // subcommand required
  CHECK(run_cli("frobnicate").exit_code == 2);     // unknown subcommand
  CHECK(run_cli("sim").exit_code == 2);            // missing design argument
  CHECK(run_cli("sim /no/such/file.dut").exit_code == 2);
  CHECK(run_cli("campaign " + design("magic32") + " --bogus-flag").exit_code ==
        2);
}

TEST_CASE("sim reports the rare arms") {
  const auto r = run_cli("sim " + design("magic32") + " --seed 7");
  CHECK(r.exit_code == 0);
  const auto j = json::parse(r.out);
  CHECK(j.at("dut_name") == "magic32");
  CHECK(j.at("total_blocks") == 3);
  CHECK(j.at("rare_count") == 1);
  CHECK(j.at("rare_targets") == json::array({"0.then"}));
}

TEST_CASE("emit-plan writes a parseable plan keyed to the mode flag") {
  TempDir tmp("plan");
  const auto full = run_cli("sim " + design("magic32") + " --seed 7 --full" +
                            " --emit-plan " + tmp.file("full.json") +
                            " --out " + tmp.file("sim.json"));
  CHECK(full.exit_code == 0);
  const auto jf = json::parse(read_file(tmp.file("full.json")));
  CHECK(jf.at("mode") == "full");
  CHECK(jf.at("instrumented").size() == 3);
  CHECK(jf.at("labels").size() == 3);

  const auto sel = run_cli("sim " + design("deep_nest") +
                           " --seed 31 --selective --emit-plan " +
                           tmp.file("sel.json") + " --out " +
                           tmp.file("sim2.json"));
  CHECK(sel.exit_code == 0);
  const auto js = json::parse(read_file(tmp.file("sel.json")));
  CHECK(js.at("mode") == "selective");
  CHECK(js.at("instrumented").size() < 40);
}

TEST_CASE("fuzz exits 1 when the budget misses the rare arm") {
  const auto r = run_cli("fuzz " + design("magic32") +
                         " --seed 7 --max-execs 2000");
  CHECK(r.exit_code == 1);
  const auto j = json::parse(r.out);
  CHECK(j.at("execs").get<std::uint64_t>() <= 2000);
  CHECK(j.at("rare_total") == 1);
  CHECK(j.at("rare_covered") == 0);
}

TEST_CASE("concolic alone covers the comparison-guarded arm") {
  const auto r = run_cli("concolic " + design("magic32") + " --seed 99");
  CHECK(r.exit_code == 0);
  const auto j = json::parse(r.out);
  CHECK(j.at("rare_covered") == j.at("rare_total"));
  CHECK(j.at("generated").get<std::uint64_t>() >= 1);
  CHECK(j.at("sat").get<std::uint64_t>() >= 1);
}

TEST_CASE("campaign: report, saved vectors, replayable coverage") {
  TempDir tmp("camp");
  const auto r = run_cli("campaign " + design("threshold_fir") +
                         " --seed 3 --out " + tmp.file("rep.json") +
                         " --save-vectors " + tmp.file("vec"));
  CHECK(r.exit_code == 0);
  const auto j = json::parse(read_file(tmp.file("rep.json")));
  CHECK(j.at("outcome") == "all_covered");
  CHECK(j.at("phases") == "fuzz1");

  // The saved corpus replays to full rare coverage through `coverage`.
  const auto cov = run_cli("coverage " + design("threshold_fir") +
                           " --seed 3 --vectors " + tmp.file("vec"));
  CHECK(cov.exit_code == 0);
  const auto jc = json::parse(cov.out);
  CHECK(jc.at("rare_covered_count") == jc.at("rare_total"));
}

TEST_CASE("identical seeds give byte-identical reports and corpora") {
  TempDir tmp("repro");
  const std::string base = "campaign " + design("magic16") +
                           " --deterministic --seed 11 --out ";
  const auto r1 = run_cli(base + tmp.file("a.json") + " --save-vectors " +
                          tmp.file("va"));
  const auto r2 = run_cli(base + tmp.file("b.json") + " --save-vectors " +
                          tmp.file("vb"));
  CHECK(r1.exit_code == 0);
  CHECK(r2.exit_code == 0);
  CHECK(read_file(tmp.file("a.json")) == read_file(tmp.file("b.json")));
  CHECK(dir_image(tmp.file("va")) == dir_image(tmp.file("vb")));

  // A different seed moves the corpus.
  const auto r3 = run_cli("campaign " + design("magic16") +
                          " --deterministic --seed 12 --out " +
                          tmp.file("c.json") + " --save-vectors " +
                          tmp.file("vc"));
  CHECK(json::parse(read_file(tmp.file("c.json"))).at("outcome") ==
        "all_covered");
  CHECK(dir_image(tmp.file("vc")) != dir_image(tmp.file("va")));
}

TEST_CASE("gen-lut and detect close the loop") {
  TempDir tmp("detect");
  // Vectors from a campaign on the trojan twin necessarily include the
  // trigger (it is the rare arm), so the LUT disagreement must surface.
  const auto camp = run_cli("campaign " + design("magic16") +
                            " --seed 11 --save-vectors " + tmp.file("vec") +
                            " --out " + tmp.file("rep.json"));
  REQUIRE(camp.exit_code == 0);

  const auto gen = run_cli("gen-lut " + design("magic16_clean") +
                           " --vectors " + tmp.file("vec") + " --out " +
                           tmp.file("golden.lut") +
                           " --salt 000102030405060708090a0b0c0d0e0f");
  CHECK(gen.exit_code == 0);
  const auto jg = json::parse(gen.out);
  CHECK(jg.at("entries").get<std::uint64_t>() >= 1);

  const std::string common = " --lut " + tmp.file("golden.lut") +
                             " --vectors " + tmp.file("vec") + " --out " +
                             tmp.file("det.json");
  CHECK(run_cli("detect " + design("magic16") + common + " --expect-trojan")
            .exit_code == 0);
  const auto jd = json::parse(read_file(tmp.file("det.json")));
  CHECK(jd.at("trojan_found") == true);
  CHECK(run_cli("detect " + design("magic16_clean") + common +
                " --expect-clean")
            .exit_code == 0);
  CHECK(run_cli("detect " + design("magic16") + common + " --expect-clean")
            .exit_code == 1);
}

TEST_CASE("corpus subcommand lists the manifest") {
  const auto all = run_cli("corpus --corpus-dir " + kCorpusDir);
  CHECK(all.exit_code == 0);
  const auto j = json::parse(all.out);
  CHECK(j.at("entries").size() == 13);

  const auto one = run_cli("corpus magic32 --corpus-dir " + kCorpusDir);
  CHECK(one.exit_code == 0);
  CHECK(json::parse(one.out).at("trojan_type") == "cwom");

  CHECK(run_cli("corpus not_a_design --corpus-dir " + kCorpusDir).exit_code ==
        2);
}
