#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result vopt(const std::string& args) {
  const std::string cmd = std::string(VOPT_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "vopt_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string config_path(const std::string& name) { return (fs::path(VOPT_SOURCE_DIR) / "experiments" / name).string(); }

} // namespace

TEST(Cli, RunPrintsSummary) {
  const auto r = vopt("run --problem BK1 --algo bbdvo --seed 3");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["problem"], "BK1");
  EXPECT_EQ(j["termination"], "stationary");
  EXPECT_EQ(j["iterations"], 1);
  EXPECT_EQ(j["fevals"], 1);
}

TEST(Cli, RunScaledTransformOnK1) {
  const auto r = vopt("run --problem FF1 --cone K1 --algo sdvo --transform Ahat --seed 2");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["cone"], "K1-hat");
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(vopt("").code, 2);
  EXPECT_EQ(vopt("frobnicate").code, 2);
  EXPECT_EQ(vopt("run --problem Nope").code, 2);
  EXPECT_EQ(vopt("run --problem BK1 --cone K9").code, 2);
  EXPECT_EQ(vopt("run --problem BK1 --algo newton").code, 2);
  EXPECT_EQ(vopt("run --problem BK1 --transform B").code, 2);
  EXPECT_EQ(vopt("run --problem BK1 --gamma 2").code, 2);
  EXPECT_EQ(vopt("run --problem BK1 --max-iter abc").code, 2);
  EXPECT_EQ(vopt("run --problem BK1 --algo mm-fixed-l").code, 2);
  EXPECT_EQ(vopt("bench --config no/such.cfg").code, 2);
  EXPECT_EQ(vopt("analyze --trace no/such.jsonl --check rate").code, 2);
  const auto bad = scratch("bad.cfg");
  std::ofstream(bad) << "[experiment]\nproblems = BK1\ncolumns = bbdvo\nbogus = 1\n";
  EXPECT_EQ(vopt("bench --config " + bad.string()).code, 2);
}

TEST(Cli, UnwritableOutputExitsTwo) {
  const auto blocker = scratch("blocker");
  std::ofstream(blocker) << "x";
  EXPECT_EQ(vopt("bench --config " + config_path("table2.cfg") + " --runs 1 --out " + (blocker / "d").string()).code,
            2);
  EXPECT_EQ(vopt("pareto --problem BK1 --runs 2 --out " + (blocker / "p.csv").string()).code, 2);
}

TEST(Cli, NumericFailureExitsThree) {
  // DD1 under K2 is unbounded below; this start runs off to overflow
  const auto r = vopt("run --problem DD1 --cone K2 --algo sdvo --seed 7");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(nlohmann::json::parse(r.out)["termination"], "numeric_failure");
}

TEST(Cli, BenchWritesTables) {
  const auto dir = scratch("bench_out");
  fs::remove_all(dir);
  const auto r = vopt("bench --config " + config_path("table2.cfg") + " --runs 2 --jobs 2 --out " + dir.string());
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("| BK1 | R2+ | bbdvo | A0 |"), std::string::npos);
  for (const char* ext : {".csv", ".json", ".md"}) EXPECT_TRUE(fs::exists(dir / (std::string("table2") + ext)));
  std::ifstream csv(dir / "table2.csv");
  int lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  EXPECT_EQ(lines, 41);
  std::ifstream js(dir / "table2.json");
  EXPECT_EQ(nlohmann::json::parse(js).size(), 40u);
}

TEST(Cli, BenchRunsZeroGivesHeaderOnly) {
  const auto dir = scratch("bench_zero");
  fs::remove_all(dir);
  ASSERT_EQ(vopt("bench --config " + config_path("table3.cfg") + " --runs 0 --out " + dir.string()).code, 0);
  std::ifstream csv(dir / "table3.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "problem,cone,algorithm,transform,iter,feval,time_ms,failures");
}

TEST(Cli, ParetoExport) {
  const auto r = vopt("pareto --problem WIT1 --cone K2 --algo bbdvo --runs 10 --seed 5");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("f1,f2,termination\n", 0), 0u);
  EXPECT_NE(r.out.find("# clusters="), std::string::npos);
  const auto path = scratch("pareto.csv");
  ASSERT_EQ(vopt("pareto --problem BK1 --runs 4 --out " + path.string()).code, 0);
  std::ifstream in(path);
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 6);
}

TEST(Cli, TraceAndAnalyze) {
  const auto trace = scratch("mm.jsonl");
  ASSERT_EQ(vopt("run --problem BK1 --algo sdvo --ls mm --seed 4 --trace " + trace.string()).code, 0);
  auto r = vopt("analyze --trace " + trace.string() + " --check u0 --grid 51");
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["check"], "u0");
  EXPECT_TRUE(j["pass"].get<bool>());
  r = vopt("analyze --trace " + trace.string() + " --check majorization --samples 200");
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(nlohmann::json::parse(r.out)["pass"].get<bool>());
  r = vopt("analyze --trace " + trace.string() + " --check majorization --L 0.5 --samples 200");
  ASSERT_EQ(r.code, 0);
  EXPECT_FALSE(nlohmann::json::parse(r.out)["pass"].get<bool>());
  EXPECT_EQ(vopt("analyze --trace " + trace.string() + " --check speed").code, 2);
}
