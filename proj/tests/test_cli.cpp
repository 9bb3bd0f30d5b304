#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string command = std::string(LONGMEM_CLI_PATH) + " " + args + " 2>&1";
  Outcome result;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return result;
  std::array<char, 4096> buffer{};
  while (std::fgets(buffer.data(), buffer.size(), pipe)) result.out += buffer.data();
  const int status = pclose(pipe);
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("longmem_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, ExpectedPrintsCurveAndHurst) {
  const auto r = run("expected --length 512");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("scale,expected_rescaled_range\n32,"), std::string::npos);
  EXPECT_NE(r.out.find("\n512,"), std::string::npos);
  EXPECT_NE(r.out.find("expected_hurst 0.54"), std::string::npos) << r.out;
}

TEST(Cli, ExpectedRejectsBadFormula) {
  EXPECT_EQ(run("expected --length 512 --formula hurst").code, 1);
  EXPECT_EQ(run("expected --length 48").code, 1);
  EXPECT_EQ(run("expected --length 512 --min-scale 30").code, 1);
}

TEST(Cli, MissingSubcommandIsUsageError) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("estimate --kind levels").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, EstimateReadsLevels) {
  const auto dir = scratch_dir("estimate");
  {
    std::ofstream out(dir / "walk.txt");
    out << "level\n";
    double level = 0.0;
    unsigned state = 12345;
    for (int t = 0; t <= 1024; ++t) {
      out << level << "\n";
      state = state * 1103515245u + 12345u;
      level += ((state >> 16) & 1) ? 1.0 : -1.0;
    }
  }
  const auto r = run("estimate --input " + (dir / "walk.txt").string() + " --kind levels --method mrs --curve");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("method mrs\nhurst "), std::string::npos);
  EXPECT_NE(r.out.find("analyzed_length 1024\n"), std::string::npos);
  EXPECT_NE(r.out.find("scale,rescaled_range\n32,"), std::string::npos);
}

TEST(Cli, EstimateErrors) {
  const auto dir = scratch_dir("estimate_errors");
  std::ofstream(dir / "bad.txt") << "1\n2\nabc\n";
  const auto bad = run("estimate --input " + (dir / "bad.txt").string() + " --kind increments --method rs");
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find(":3:"), std::string::npos) << bad.out;

  EXPECT_EQ(run("estimate --input " + (dir / "none.txt").string() + " --kind increments --method rs").code, 1);
  EXPECT_EQ(run("estimate --input " + (dir / "bad.txt").string() + " --kind diffs --method rs").code, 1);

  {
    std::ofstream flat(dir / "flat.txt");
    for (int t = 0; t < 128; ++t) flat << "1.5\n";
  }
  // Constant increments have no dispersion at any scale.
  EXPECT_EQ(run("estimate --input " + (dir / "flat.txt").string() + " --kind increments --method rs").code, 2);
}

TEST(Cli, SimulateWritesOutputs) {
  const auto dir = scratch_dir("simulate");
  std::ofstream(dir / "config.json")
      << R"({"seed": 11, "distributions": ["normal"], "processes": ["ar1"], "lengths": [256], "replications": 20})";
  const auto r = run("simulate --config " + (dir / "config.json").string() + " --out " + (dir / "out").string() +
                     " --dump-estimates --paper-format --workers 2");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir / "out" / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "estimates.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "run.json"));

  std::ofstream(dir / "bad.json") << R"({"seed": 11, "distributions": ["normal"], "processes": ["iid"], "lengths": [48]})";
  const auto bad = run("simulate --config " + (dir / "bad.json").string() + " --out " + (dir / "out2").string());
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("lengths"), std::string::npos) << bad.out;
}
