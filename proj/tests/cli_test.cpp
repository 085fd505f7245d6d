#include <sys/wait.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

// One directory per test; ctest runs each test in its own process.
fs::path work_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path d = fs::temp_directory_path() / "fm_cli_test" / info->name();
  fs::create_directories(d);
  return d;
}

// Runs the CLI with `args`, capturing stdout+stderr; returns the exit code.
int cli(const std::string& args, std::string* output = nullptr) {
  const fs::path log = work_dir() / "last_output.txt";
  const std::string cmd = "cd '" + work_dir().string() + "' && '" + FISHMONGER_CLI + "' " + args +
                          " > '" + log.string() + "' 2>&1";
  const int raw = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(log);
    std::ostringstream s;
    s << in.rdbuf();
    *output = s.str();
  }
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& body) { std::ofstream(p) << body; }

}  // namespace

TEST(Cli, SimulateWritesArtifactsAndIsDeterministic) {
  fs::remove_all(work_dir());
  write(work_dir() / "min.ini", "[curve]\nfamily = rational\n[cook]\ntype = 1\npolicy = naive\n");
  std::string out;
  ASSERT_EQ(cli("simulate --config min.ini --out-dir run_a", &out), 0) << out;
  ASSERT_EQ(cli("simulate --config min.ini --out-dir run_b", &out), 0) << out;
  for (const char* f : {"config.ini", "history.jsonl", "stats.json", "prefix.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(work_dir() / "run_a" / f)) << f;
  }
  EXPECT_EQ(slurp(work_dir() / "run_a" / "stats.json"), slurp(work_dir() / "run_b" / "stats.json"));
  EXPECT_EQ(slurp(work_dir() / "run_a" / "history.jsonl"),
            slurp(work_dir() / "run_b" / "history.jsonl"));

  auto stats = nlohmann::json::parse(slurp(work_dir() / "run_a" / "stats.json"));
  EXPECT_EQ(stats["rounds"], 100000);
  EXPECT_LE(stats["welfare_residual"].get<double>(), 1e-9);

  // The resolved config reproduces the run.
  ASSERT_EQ(cli("simulate --config run_a/config.ini --out-dir run_c", &out), 0) << out;
  EXPECT_EQ(slurp(work_dir() / "run_a" / "stats.json"), slurp(work_dir() / "run_c" / "stats.json"));

  auto manifest = nlohmann::json::parse(slurp(work_dir() / "run_a" / "manifest.json"));
  EXPECT_EQ(manifest["command"], "simulate");
  EXPECT_EQ(manifest["artifacts"].size(), 4u);
}

TEST(Cli, FlagsOverrideConfig) {
  write(work_dir() / "small.ini", "[curve]\nfamily = rational\n[engine]\nrounds = 1000\nburn_in = 10\n");
  std::string out;
  ASSERT_EQ(cli("simulate --config small.ini --rounds 500 --seed 3 --replications 3 --out-dir ov", &out), 0)
      << out;
  auto stats = nlohmann::json::parse(slurp(work_dir() / "ov" / "stats.json"));
  EXPECT_EQ(stats["rounds"], 500);
  EXPECT_TRUE(fs::exists(work_dir() / "ov" / "monte_carlo.json"));
}

TEST(Cli, MissingFamilyIsExitTwoNamingTheField) {
  write(work_dir() / "nofamily.ini", "[curve]\nrate = 1\n");
  std::string out;
  EXPECT_EQ(cli("simulate --config nofamily.ini --out-dir nf", &out), 2);
  EXPECT_NE(out.find("curve.family"), std::string::npos) << out;
}

TEST(Cli, VerifyDefaultSuitePasses) {
  std::string out;
  EXPECT_EQ(cli("verify", &out), 0) << out;
  EXPECT_EQ(out.find("FAIL"), std::string::npos) << out;
}

TEST(Cli, VerifyNonMonotoneCurveFailsWithWitness) {
  write(work_dir() / "bad.csv", "q,p\n0,0\n1,0.9\n2,0.2\n");
  std::string out;
  EXPECT_EQ(cli("verify --suite simplex --curve-file bad.csv", &out), 1);
  EXPECT_NE(out.find("FAIL simplex"), std::string::npos) << out;
  EXPECT_NE(out.find("\"q\""), std::string::npos) << out;
}

TEST(Cli, VerifyEmptySuiteIsUsageError) {
  EXPECT_EQ(cli("verify --suite ''"), 2);
  EXPECT_EQ(cli("verify --suite bogus"), 2);
}

TEST(Cli, DistortionSweepCsv) {
  std::string out;
  ASSERT_EQ(cli("sweep --kind distortion --list 1,10,100,1000", &out), 0) << out;
  std::istringstream lines(out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "q,fisher_rate,cook_rate,ratio");
  double last = 1e9;
  int rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty() || !std::isdigit(static_cast<unsigned char>(line[0]))) continue;
    const double ratio = std::stod(line.substr(line.rfind(',') + 1));
    EXPECT_LT(ratio, last);
    last = ratio;
    ++rows;
  }
  EXPECT_EQ(rows, 4);
}

TEST(Cli, SinglePointSweep) {
  std::string out;
  ASSERT_EQ(cli("sweep --kind distortion --list 5 --out-dir single", &out), 0) << out;
  const std::string csv = slurp(work_dir() / "single" / "distortion.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST(Cli, ThresholdSweepPeaksAtType) {
  std::string out;
  ASSERT_EQ(cli("sweep --kind threshold --q 2 --rounds 20000 --replications 2 --list 1,2,3 --out-dir th",
                &out),
            0)
      << out;
  EXPECT_NE(out.find("argmax threshold 2"), std::string::npos) << out;
}

TEST(Cli, OracleBudgetRefusalAndResult) {
  std::string out;
  ASSERT_EQ(cli("oracle --horizon 2 --grid 2", &out), 0) << out;
  auto j = nlohmann::json::parse(out);
  EXPECT_GE(j["gap"].get<double>(), 0.0);
  EXPECT_EQ(cli("oracle --horizon 12 --grid 3", &out), 2);
}

TEST(Cli, NoSubcommandIsUsageError) {
  EXPECT_EQ(cli(""), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
}
