#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "safetk/format.hpp"
#include "safetk/sts/model.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("safetk_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args) {
    std::string cmd = "cd '" + dir_.string() + "' && '" SAFETK_BIN "' " + args + " > stdout.txt 2> stderr.txt";
    int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(dir_ / "stdout.txt");
    r.err = slurp(dir_ / "stderr.txt");
    return r;
  }

  std::string model(const std::string& stem) {
    return "--model " + fixture(stem + ".smx") + " --fei " + fixture(stem + ".fei");
  }

  fs::path dir_;
};

TEST_F(Cli, ExtendWithoutFaultsKeepsNominalBehaviour) {
  Result r = run("extend --model " + fixture("latch.smx") + " --out x");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir_ / "x/events.tsv"), "");
  auto nominal = safetk::sts::parse_model(safetk::read_file(fixture("latch.smx")));
  auto extended = safetk::sts::parse_model(slurp(dir_ / "x/extended.smx"));
  EXPECT_EQ(safetk::sts::print_model(extended), safetk::sts::print_model(nominal));
}

TEST_F(Cli, ExtendWritesEventRegistry) {
  Result r = run("extend " + model("battery_sensor") + " --out x");
  ASSERT_EQ(r.code, 0) << r.err;
  std::string reg = slurp(dir_ / "x/events.tsv");
  EXPECT_EQ(std::count(reg.begin(), reg.end(), '\n'), 4);
  EXPECT_NE(reg.find("G1_Off\tfault\tmode#G1_Off\t0.01"), std::string::npos);
}

TEST_F(Cli, McsTsvAndSilentSuccess) {
  Result r = run("mcs " + model("redundant_pair") + " --tle '!out' --out o --format tsv --format xml");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.err, "");
  EXPECT_EQ(slurp(dir_ / "o/mcs.tsv"), "fc\nfa\tfb\n");
  EXPECT_NE(slurp(dir_ / "o/mcs.xml").find("<"), std::string::npos);
}

TEST_F(Cli, Deterministic) {
  std::string args = model("battery_sensor") + " --tle 'm = P & !s1 & !s2' --step-bound 12";
  ASSERT_EQ(run("ft " + args + " --out a --format xml --format tsv --format dot").code, 0);
  ASSERT_EQ(run("ft " + args + " --out b --format xml --format tsv --format dot").code, 0);
  for (const char* f : {"ft.xml", "ft.tsv", "ft.dot"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
    EXPECT_FALSE(slurp(dir_ / "a" / f).empty()) << f;
  }
}

TEST_F(Cli, InputErrorsExitTwo) {
  Result r = run("mcs --model missing.smx --tle x");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing.smx"), std::string::npos);
  EXPECT_EQ(run("mcs --no-such-flag").code, 2);
  EXPECT_EQ(run("mcs " + model("redundant_pair") + " --tle 'nosuchvar'").code, 2);
}

TEST_F(Cli, ResourceCapExitsThree) {
  Result r = run("mcs " + model("battery_sensor") + " --tle '!s1 & !s2' --max-states 5");
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  std::ofstream(dir_ / "c.ini") << "[mcs]\nmodel = " << fixture("redundant_pair.smx")
                                 << "\nfei = " << fixture("redundant_pair.fei") << "\ntle = !out\nmax-card = 1\nout = cfg\n";
  ASSERT_EQ(run("--config c.ini mcs").code, 0);
  EXPECT_EQ(slurp(dir_ / "cfg/mcs.tsv"), "fc\n");
  ASSERT_EQ(run("--config c.ini mcs --max-card 2").code, 0);
  EXPECT_EQ(slurp(dir_ / "cfg/mcs.tsv"), "fc\nfa\tfb\n");
}

TEST_F(Cli, TfpgConvertRoundTrip) {
  ASSERT_EQ(run("tfpg convert --input " + fixture("battery_sensor.tfpg") + " --to xml --output g.xml").code, 0);
  ASSERT_EQ(run("tfpg convert --input g.xml --to text --output g.tfpg").code, 0);
  Result direct = run("tfpg convert --input " + fixture("battery_sensor.tfpg") + " --to text");
  ASSERT_EQ(direct.code, 0);
  EXPECT_EQ(slurp(dir_ / "g.tfpg"), direct.out);
  EXPECT_EQ(run("tfpg convert --input " + fixture("battery_sensor.tfpg") + " --to dot --output g.dot").code, 0);
  EXPECT_EQ(slurp(dir_ / "g.dot").rfind("digraph", 0), 0u);
}

TEST_F(Cli, TfpgCheckCompleteAndIncomplete) {
  std::string common = "tfpg check " + model("battery_sensor") + " --bind " + fixture("battery_sensor.bind") +
                       " --step-bound 30 --out c";
  Result ok = run(common + " --tfpg " + fixture("battery_sensor_scaled.tfpg"));
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_EQ(ok.out, "complete (bound 30)\n");

  std::string g = safetk::read_file(fixture("battery_sensor_scaled.tfpg"));
  std::string line = "edge B1_DEAD -> S2_NO";
  auto at = g.find(line);
  ASSERT_NE(at, std::string::npos);
  g.erase(at, g.find('\n', at) - at + 1);
  std::ofstream(dir_ / "mut.tfpg") << g;
  Result bad = run(common + " --tfpg mut.tfpg");
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("S2_NO missing-cause"), std::string::npos);
  std::string trace = slurp(dir_ / "c/counterexample_1.trace");
  EXPECT_EQ(trace.rfind("-- S2_NO missing-cause at step", 0), 0u);
}

TEST_F(Cli, TfpgSynthWritesGraph) {
  Result r = run("tfpg synth " + model("battery_sensor") + " --bind " + fixture("battery_sensor.bind") +
              " --step-bound 25 --out s");
  ASSERT_EQ(r.code, 0) << r.err;
  std::string g = slurp(dir_ / "s/synthesized.tfpg");
  EXPECT_EQ(std::count(g.begin(), g.end(), '>'), 14);
}

}  // namespace
