#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "vopt/bench.hpp"

using vopt::Algorithm;
using vopt::BenchColumn;
using vopt::BenchConfig;
using vopt::PolyhedralCone;
using vopt::Vector;

namespace {

BenchConfig parse(const std::string& text) {
  std::istringstream in(text);
  return vopt::parse_bench_config(in);
}

BenchConfig small_config(std::vector<std::string> problems, int runs) {
  BenchConfig cfg;
  cfg.problems = std::move(problems);
  cfg.columns = {vopt::parse_column("sdvo:A"), vopt::parse_column("bbdvo:A")};
  cfg.runs = runs;
  return cfg;
}

} // namespace

TEST(BenchConfig, ParsesFullFile) {
  const auto cfg = parse(R"([experiment]
name = demo
runs = 20
seed = 7
problems = BK1, DD1
cones = R2+ K1
columns = sdvo:A sdvo:Ahat edvo bbdvo:A

[solver]
tolerance = 1e-7
max_iter = 300
line_search = mm
sigma = 0.001
gamma = 0.25
jmax = 30
alpha_min = 1e-4
alpha_max = 1e5
)");
  EXPECT_EQ(cfg.name, "demo");
  EXPECT_EQ(cfg.runs, 20);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.problems, (std::vector<std::string>{"BK1", "DD1"}));
  EXPECT_EQ(cfg.cones, (std::vector<std::string>{"R2+", "K1"}));
  ASSERT_EQ(cfg.columns.size(), 4u);
  EXPECT_EQ(cfg.columns[1], (BenchColumn{Algorithm::SDVO, true}));
  EXPECT_EQ(cfg.columns[2], (BenchColumn{Algorithm::EDVO, false}));
  EXPECT_EQ(cfg.solver.tolerance, 1e-7);
  EXPECT_EQ(cfg.solver.max_iter, 300);
  EXPECT_EQ(cfg.solver.line_search, vopt::LineSearchKind::Majorization);
  EXPECT_EQ(cfg.solver.ls.sigma, 0.001);
  EXPECT_EQ(cfg.solver.ls.gamma, 0.25);
  EXPECT_EQ(cfg.solver.ls.jmax, 30);
  EXPECT_EQ(cfg.solver.alpha_bounds.min, 1e-4);
  EXPECT_EQ(cfg.solver.alpha_bounds.max, 1e5);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(BenchConfig, Defaults) {
  const auto cfg = parse("[experiment]\nproblems = BK1\ncolumns = bbdvo\n");
  EXPECT_EQ(cfg.runs, 200);
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.cones, (std::vector<std::string>{"R2+"}));
  EXPECT_EQ(cfg.solver.tolerance, 1e-6);
  EXPECT_EQ(cfg.solver.max_iter, 500);
  EXPECT_EQ(cfg.solver.line_search, vopt::LineSearchKind::Armijo);
}

TEST(BenchConfig, Errors) {
  EXPECT_THROW(parse("[experiment]\nbogus = 1\n"), vopt::ConfigError);
  EXPECT_THROW(parse("[solver]\nwolfe = 1\n"), vopt::ConfigError);
  EXPECT_THROW(parse("[other]\nx = 1\n"), vopt::ConfigError);
  EXPECT_THROW(parse("[experiment]\nruns = many\n"), vopt::ConfigError);
  EXPECT_THROW(parse("[experiment]\nruns = 3.5\n"), vopt::ConfigError);
  EXPECT_THROW(parse("[experiment]\ncolumns = sdvo:B\n"), vopt::ConfigError);
  EXPECT_THROW(parse("[experiment]\ncolumns = mm-ell:Ahat\n"), vopt::ConfigError);
  EXPECT_THROW(parse("[solver]\nline_search = exact\n"), vopt::ConfigError);
  EXPECT_THROW(parse("[experiment\nruns = 1\n"), vopt::ConfigError);
  EXPECT_THROW(vopt::load_bench_config("no/such/dir/cfg.cfg"), vopt::ConfigError);
  // parses, but fails validation
  EXPECT_THROW(parse("[experiment]\nproblems = BK1\ncolumns = bbdvo\nruns = -1\n").validate(), vopt::ConfigError);
  EXPECT_THROW(parse("[experiment]\ncolumns = bbdvo\n").validate(), vopt::ConfigError);
  EXPECT_THROW(parse("[experiment]\nproblems = BK1\n").validate(), vopt::ConfigError);
  EXPECT_THROW(parse("[experiment]\nproblems = BK1\ncolumns = bbdvo\n[solver]\ngamma = 1.5\n").validate(),
               vopt::ConfigError);
}

TEST(BenchConfig, ShippedExperimentsParse) {
  const std::filesystem::path dir = std::filesystem::path(VOPT_SOURCE_DIR) / "experiments";
  int found = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".cfg") continue;
    const auto cfg = vopt::load_bench_config(entry.path().string());
    EXPECT_NO_THROW(cfg.validate()) << entry.path();
    EXPECT_EQ(cfg.runs, 200) << entry.path();
    EXPECT_EQ(cfg.problems.size(), 10u) << entry.path();
    ++found;
  }
  EXPECT_EQ(found, 3);
}

TEST(RunSeed, DistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (int r = 0; r < 1000; ++r) seen.insert(vopt::run_seed(42, r));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(vopt::run_seed(42, 3), vopt::run_seed(42, 3));
  EXPECT_NE(vopt::run_seed(42, 0), vopt::run_seed(43, 0));
}

TEST(TransformLabel, Examples) {
  EXPECT_EQ(vopt::transform_label("R2+", false), "A0");
  EXPECT_EQ(vopt::transform_label("K1", true), "A1hat");
  EXPECT_EQ(vopt::transform_label("K2", false), "A2");
  EXPECT_EQ(vopt::transform_label("custom", true), "Ahat");
}

TEST(Benchmark, SingleRunBk1) {
  auto cfg = small_config({"BK1"}, 1);
  cfg.columns = {vopt::parse_column("bbdvo")};
  const auto rows = vopt::run_benchmark(cfg);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].problem, "BK1");
  EXPECT_EQ(rows[0].cone, "R2+");
  EXPECT_EQ(rows[0].algorithm, "bbdvo");
  EXPECT_EQ(rows[0].transform, "A0");
  EXPECT_EQ(rows[0].iter, 1.0);
  EXPECT_EQ(rows[0].feval, 1.0);
  EXPECT_EQ(rows[0].failures, 0);
  EXPECT_EQ(rows[0].runs, 1);
}

TEST(Benchmark, DeterministicAcrossThreadCounts) {
  auto cfg = small_config({"DD1", "FF1", "Imbalance1"}, 12);
  cfg.cones = {"R2+", "K2"};
  const auto a = vopt::run_benchmark(cfg, 1);
  const auto b = vopt::run_benchmark(cfg, 4);
  const auto c = vopt::run_benchmark(cfg, 3);
  ASSERT_EQ(a.size(), 12u);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].problem, b[i].problem);
    EXPECT_EQ(a[i].iter, b[i].iter);
    EXPECT_EQ(a[i].feval, b[i].feval);
    EXPECT_EQ(a[i].failures, b[i].failures);
    EXPECT_EQ(a[i].iter, c[i].iter);
  }
}

TEST(Benchmark, ObserverSeesEveryRun) {
  auto cfg = small_config({"BK1", "JOS1a"}, 5);
  int calls = 0;
  std::set<std::pair<std::string, int>> seen;
  vopt::run_benchmark(cfg, 3, [&](const vopt::BenchCell& cell, int r, const vopt::SolveTrace& tr) {
    ++calls;
    seen.insert({cell.problem + vopt::to_string(cell.column), r});
    EXPECT_FALSE(tr.records.empty());
  });
  EXPECT_EQ(calls, 20);
  EXPECT_EQ(seen.size(), 20u);
}

TEST(Benchmark, RowMeansMatchIndividualRuns) {
  auto cfg = small_config({"FF1"}, 7);
  cfg.columns = {vopt::parse_column("sdvo")};
  const auto rows = vopt::run_benchmark(cfg);
  const auto p = vopt::problems::by_name("FF1");
  double iters = 0;
  for (int r = 0; r < 7; ++r) {
    const auto o = vopt::run_cell(p, PolyhedralCone::nonnegative_orthant(2), cfg.columns[0], cfg.solver,
                                  vopt::sample_start(p, vopt::run_seed(cfg.seed, r)));
    iters += o.iterations;
  }
  EXPECT_DOUBLE_EQ(rows[0].iter, iters / 7);
}

TEST(Benchmark, TableReplicaShape) {
  auto cfg = small_config(vopt::problems::names(), 2);
  cfg.columns = {vopt::parse_column("sdvo:A"), vopt::parse_column("sdvo:Ahat"), vopt::parse_column("edvo:A"),
                 vopt::parse_column("bbdvo:A")};
  const auto rows = vopt::run_benchmark(cfg, 4);
  ASSERT_EQ(rows.size(), 40u);
  std::set<std::string> transforms;
  for (const auto& r : rows) transforms.insert(r.transform);
  EXPECT_EQ(transforms, (std::set<std::string>{"A0", "A0hat"}));
}

TEST(Benchmark, NumericFailureIsCountedNotThrown) {
  // both objectives share an unbounded direction, so the iterates overflow
  vopt::VectorProblem p = vopt::problems::bk1();
  p.name = "runaway";
  p.eval = [](const Vector& x) {
    return Vector{{-std::exp(x(0)) + x(1) * x(1), -std::exp(x(0)) + (x(1) - 1) * (x(1) - 1)}};
  };
  p.jac = [](const Vector& x) {
    vopt::Matrix j(2, 2);
    j << -std::exp(x(0)), 2 * x(1), -std::exp(x(0)), 2 * (x(1) - 1);
    return j;
  };
  const auto o = vopt::run_cell(p, PolyhedralCone::nonnegative_orthant(2), vopt::parse_column("sdvo"), {},
                                vopt::StartPair{Vector{{3.0, 1.0}}, {}});
  EXPECT_EQ(o.status, "numeric_failure");
  EXPECT_TRUE(o.failed());
}

TEST(Benchmark, Errors) {
  auto cfg = small_config({"BK1"}, 1);
  EXPECT_THROW(vopt::run_benchmark(cfg, 0), vopt::ConfigError);
  cfg.problems = {"Nope"};
  EXPECT_THROW(vopt::run_benchmark(cfg), vopt::ConfigError);
}

TEST(Table, CsvHeaderAndRoundTrip) {
  std::ostringstream empty;
  vopt::export_table({}, vopt::TableFormat::Csv, empty);
  EXPECT_EQ(empty.str(), "problem,cone,algorithm,transform,iter,feval,time_ms,failures\n");

  const auto rows = vopt::run_benchmark(small_config({"BK1", "DD1"}, 3));
  std::stringstream csv;
  vopt::export_table(rows, vopt::TableFormat::Csv, csv);
  const auto back = vopt::read_table_csv(csv);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].problem, rows[i].problem);
    EXPECT_EQ(back[i].transform, rows[i].transform);
    EXPECT_EQ(back[i].iter, rows[i].iter);
    EXPECT_EQ(back[i].feval, rows[i].feval);
    EXPECT_EQ(back[i].time_ms, rows[i].time_ms);
    EXPECT_EQ(back[i].failures, rows[i].failures);
  }
  std::istringstream bad("problem,cone\nBK1,R2+\n");
  EXPECT_THROW(vopt::read_table_csv(bad), vopt::ConfigError);
}

TEST(Table, JsonAndMarkdown) {
  vopt::BenchmarkRow r{"BK1", "K1", "bbdvo", "A1", 1.0, 1.0, 0.01, 0, 200};
  std::ostringstream js;
  vopt::export_table({r}, vopt::TableFormat::Json, js);
  const auto j = nlohmann::json::parse(js.str());
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["transform"], "A1");
  EXPECT_EQ(j[0]["iter"], 1.0);
  std::ostringstream md;
  vopt::export_table({r}, vopt::TableFormat::Markdown, md);
  EXPECT_NE(md.str().find("| BK1 | K1 | bbdvo | A1 | 1.00 | 1.00 |"), std::string::npos);
  EXPECT_EQ(vopt::parse_table_format("md"), vopt::TableFormat::Markdown);
  EXPECT_THROW(vopt::parse_table_format("xml"), vopt::ConfigError);
  // a path below a regular file can never be opened
  const auto blocker = std::filesystem::temp_directory_path() / "vopt_table_blocker";
  std::ofstream(blocker) << "x";
  EXPECT_THROW(vopt::export_table({r}, vopt::TableFormat::Csv, (blocker / "t.csv").string()), vopt::Error);
  std::filesystem::remove(blocker);
}

TEST(Pareto, ClusterCountExamples) {
  auto pt = [](double a, double b) { return vopt::ParetoPoint{Vector{{a, b}}, "stationary", 0.0, Vector{}}; };
  EXPECT_EQ(vopt::cluster_count({}), 0);
  EXPECT_EQ(vopt::cluster_count({pt(0, 0), pt(0, 0.0005), pt(1, 1)}), 2);
  // chaining joins points further apart than the radius
  EXPECT_EQ(vopt::cluster_count({pt(0, 0), pt(0, 0.0009), pt(0, 0.0018)}), 1);
  EXPECT_EQ(vopt::cluster_count({pt(0, 0), pt(0, 0.0011)}), 2);
  EXPECT_EQ(vopt::cluster_count({pt(0, 0), pt(0, 0.0011)}, 0.01), 1);
}

TEST(Pareto, ExportAndCollect) {
  const auto p = vopt::problems::bk1();
  const auto pts = vopt::collect_pareto_points(p, PolyhedralCone::nonnegative_orthant(2),
                                               vopt::parse_column("bbdvo"), 25, 42);
  ASSERT_EQ(pts.size(), 25u);
  for (const auto& q : pts) EXPECT_EQ(q.status, "stationary");
  std::ostringstream os;
  vopt::export_pareto_points(pts, os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "f1,f2,termination");
  int data = 0;
  std::string last;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) last = line;
    else ++data;
  }
  EXPECT_EQ(data, 25);
  EXPECT_EQ(last, "# clusters=" + std::to_string(vopt::cluster_count(pts)) + " radius=0.001");
  auto three = vopt::problems::diagonal_quadratic_pair("q", Vector::Ones(2), Vector::Zero(2), Vector::Ones(2),
                                                       Vector::Ones(2));
  three.m = 3;
  EXPECT_THROW(vopt::collect_pareto_points(three, PolyhedralCone::nonnegative_orthant(3), vopt::parse_column("sdvo"),
                                           1, 1),
               vopt::ConfigError);
}

TEST(Trace, RoundTrip) {
  const auto p = vopt::problems::by_name("DD1");
  vopt::SolverConfig cfg;
  cfg.cone = PolyhedralCone::k1();
  const auto tr = vopt::run(cfg, p, vopt::sample_start(p, 9));
  std::stringstream ss;
  vopt::write_trace(tr, cfg.cone.transform(), ss);
  const auto back = vopt::read_trace(ss);
  EXPECT_EQ(back.transform, cfg.cone.transform());
  EXPECT_EQ(back.trace.problem, "DD1");
  EXPECT_EQ(back.trace.cone, "K1");
  EXPECT_EQ(back.trace.algorithm, Algorithm::BBDVO);
  EXPECT_EQ(back.trace.termination, tr.termination);
  EXPECT_EQ(back.trace.iterations, tr.iterations);
  EXPECT_EQ(back.trace.fevals, tr.fevals);
  ASSERT_EQ(back.trace.records.size(), tr.records.size());
  for (std::size_t k = 0; k < tr.records.size(); ++k) {
    EXPECT_EQ(back.trace.records[k].x, tr.records[k].x);
    EXPECT_EQ(back.trace.records[k].f, tr.records[k].f);
    EXPECT_EQ(back.trace.records[k].d, tr.records[k].d);
    EXPECT_EQ(back.trace.records[k].t, tr.records[k].t);
    EXPECT_EQ(back.trace.records[k].alpha.has_value(), tr.records[k].alpha.has_value());
  }
}

TEST(Trace, RejectsMalformedInput) {
  std::istringstream no_meta(R"({"type":"iter","k":0,"x":[0],"f":[0],"d":[0],"dnorm":0,"t":0,"trials":0})");
  EXPECT_THROW(vopt::read_trace(no_meta), vopt::ConfigError);
  std::istringstream junk("not json\n");
  EXPECT_THROW(vopt::read_trace(junk), vopt::ConfigError);
  std::istringstream unknown(R"({"type":"comment"})");
  EXPECT_THROW(vopt::read_trace(unknown), vopt::ConfigError);
}
