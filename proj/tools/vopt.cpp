// vopt: command-line front end for the solvers and the benchmark harness.
//
//   vopt bench   --config experiments/table2.cfg --seed 42 --jobs 1 --out results/
//   vopt run     --problem DD1 --cone K1 --algo bbdvo --seed 7 --trace t.jsonl
//   vopt pareto  --problem WIT1 --cone K2 --algo bbdvo --runs 200 --out wit1_k2.csv
//   vopt analyze --trace t.jsonl --check {rate|u0|majorization}
//
// Exit codes: 0 success, 2 configuration error, 3 run error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vopt/analysis.hpp"
#include "vopt/bench.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRun = 3;

struct SolverFlags {
  std::optional<double> sigma, gamma, alpha_min, alpha_max, tolerance, L;
  std::optional<int> max_iter, jmax;
  std::optional<std::string> ls;

  void attach(CLI::App* app) {
    app->add_option("--sigma", sigma, "Armijo constant");
    app->add_option("--gamma", gamma, "backtracking factor");
    app->add_option("--alpha-min", alpha_min, "lower clamp of BB scalars");
    app->add_option("--alpha-max", alpha_max, "upper clamp of BB scalars");
    app->add_option("--tol", tolerance, "stationarity tolerance on ||d||");
    app->add_option("--max-iter", max_iter, "iteration cap");
    app->add_option("--jmax", jmax, "maximum backtracking exponent");
    app->add_option("--ls", ls, "line search: armijo or mm");
    app->add_option("--L", L, "constant for mm-fixed-l");
  }

  void apply(vopt::SolverConfig& s) const {
    if (sigma) s.ls.sigma = *sigma;
    if (gamma) s.ls.gamma = *gamma;
    if (alpha_min) s.alpha_bounds.min = *alpha_min;
    if (alpha_max) s.alpha_bounds.max = *alpha_max;
    if (tolerance) s.tolerance = *tolerance;
    if (max_iter) s.max_iter = *max_iter;
    if (jmax) s.ls.jmax = *jmax;
    if (ls) s.line_search = vopt::parse_line_search(*ls);
    if (L) s.fixed_L = *L;
  }
};

nlohmann::json vec_json(const vopt::Vector& v) { return vopt::to_json(v); }

int cmd_bench(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<int> runs,
              int jobs, const std::string& out_dir, const SolverFlags& flags) {
  vopt::BenchConfig cfg = vopt::load_bench_config(config_path);
  if (seed) cfg.seed = *seed;
  if (runs) cfg.runs = *runs;
  flags.apply(cfg.solver);
  cfg.validate();
  if (!out_dir.empty()) {
    // fail before the runs, not after
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
      throw vopt::ConfigError("cannot create output directory '" + out_dir + "'");
    }
  }

  const auto rows = vopt::run_benchmark(cfg, jobs);
  vopt::export_table(rows, vopt::TableFormat::Markdown, std::cout);
  if (!out_dir.empty()) {
    const std::filesystem::path base = std::filesystem::path(out_dir) / cfg.name;
    vopt::export_table(rows, vopt::TableFormat::Csv, base.string() + ".csv");
    vopt::export_table(rows, vopt::TableFormat::Json, base.string() + ".json");
    vopt::export_table(rows, vopt::TableFormat::Markdown, base.string() + ".md");
  }
  return 0;
}

int cmd_run(const std::string& problem, const std::string& cone, const std::string& algo, bool scaled,
            std::uint64_t seed, const std::string& trace_path, const SolverFlags& flags) {
  const vopt::VectorProblem p = vopt::problems::by_name(problem);
  vopt::SolverConfig cfg;
  flags.apply(cfg);
  cfg.algorithm = vopt::parse_algorithm(algo);
  const vopt::StartPair start = vopt::sample_start(p, seed);
  const vopt::PolyhedralCone base = vopt::PolyhedralCone::by_name(cone);
  cfg.cone = scaled ? vopt::scaled_transform(base, p, start.x0) : base;
  if (!vopt::uses_line_search(cfg.algorithm)) (void)vopt::strategy_alpha(cfg, cfg.cone, p);

  vopt::SolveTrace trace;
  int code = 0;
  try {
    trace = vopt::run(cfg, p, start);
  } catch (const vopt::SolveError& e) {
    std::cerr << "error: " << e.what() << '\n';
    trace = e.partial();
    code = kExitRun;
  }
  if (!trace_path.empty()) {
    std::ofstream os(trace_path);
    if (!os) throw vopt::ConfigError("cannot write trace '" + trace_path + "'");
    vopt::write_trace(trace, cfg.cone.transform(), os);
  }
  if (trace.records.empty()) return code;
  nlohmann::ordered_json summary = {{"problem", p.name},
                                    {"cone", cfg.cone.name()},
                                    {"algorithm", vopt::to_string(cfg.algorithm)},
                                    {"termination", code ? "numeric_failure" : vopt::to_string(trace.termination)},
                                    {"iterations", trace.iterations},
                                    {"fevals", trace.fevals},
                                    {"wall_ms", trace.wall_ms},
                                    {"final_dnorm", trace.final_dnorm()},
                                    {"x", vec_json(trace.x_final())},
                                    {"f", vec_json(trace.f_final())}};
  std::cout << summary.dump(2) << '\n';
  return code;
}

int cmd_pareto(const std::string& problem, const std::string& cone, const std::string& algo, bool scaled,
               int runs, std::uint64_t seed, double radius, const std::string& out, const SolverFlags& flags) {
  const vopt::VectorProblem p = vopt::problems::by_name(problem);
  vopt::SolverConfig cfg;
  flags.apply(cfg);
  vopt::BenchColumn col{vopt::parse_algorithm(algo), scaled};
  const auto pts = vopt::collect_pareto_points(p, vopt::PolyhedralCone::by_name(cone), col, runs, seed, cfg);
  if (out.empty()) {
    vopt::export_pareto_points(pts, std::cout, radius);
  } else {
    std::ofstream os(out);
    if (!os) throw vopt::ConfigError("cannot write '" + out + "'");
    vopt::export_pareto_points(pts, os, radius);
    std::cout << "points=" << pts.size() << " clusters=" << vopt::cluster_count(pts, radius) << '\n';
  }
  return 0;
}

int cmd_analyze(const std::string& trace_path, const std::string& check, std::optional<double> rate,
                std::optional<double> scale_L, int grid, int samples) {
  std::ifstream is(trace_path);
  if (!is) throw vopt::ConfigError("cannot open trace '" + trace_path + "'");
  const vopt::LoadedTrace lt = vopt::read_trace(is);
  const vopt::VectorProblem p = vopt::problems::by_name(lt.trace.problem);
  const vopt::PolyhedralCone cone(lt.transform, lt.trace.cone);
  nlohmann::ordered_json report = {{"problem", p.name}, {"cone", cone.name()}, {"check", check}};

  if (check == "rate") {
    double r = 0.0;
    if (rate) {
      r = *rate;
    } else if (lt.trace.algorithm == vopt::Algorithm::MMEllBase && p.mu && p.ell) {
      r = std::sqrt(1.0 - 1.0 / vopt::condition_number(*p.mu, *p.ell, cone));
    } else {
      throw vopt::ConfigError("--rate is required for this trace");
    }
    const auto rep = vopt::verify_linear_rate(lt.trace, lt.trace.x_final(), r);
    report["bound"] = rep.bound;
    report["max_ratio"] = rep.max_ratio();
    report["ratios"] = rep.ratios;
    report["violations"] = rep.violations.size();
    report["pass"] = rep.pass;
  } else if (check == "u0") {
    const vopt::GridValues gv = vopt::evaluate_grid(p, vopt::box_grid(p, grid));
    const auto& recs = lt.trace.records;
    const double diam = vopt::level_set_diameter(recs.front().f, gv, cone);
    nlohmann::json values = nlohmann::json::array();
    bool pass = true;
    std::optional<double> lmax;
    if (p.ell) lmax = vopt::ell_max(*p.ell, cone);
    for (const auto& rec : recs) {
      const double u = vopt::u0_grid_estimate(rec.f, gv, cone);
      nlohmann::json row = {{"k", rec.k}, {"u0", u}};
      if (lmax && rec.k >= 1) {
        const double bound = *lmax * diam * diam / (2.0 * rec.k);
        row["bound"] = bound;
        pass = pass && u <= 1.05 * bound;
      }
      values.push_back(row);
    }
    report["R"] = diam;
    if (lmax) report["ell_max"] = *lmax;
    report["values"] = values;
    report["pass"] = pass;
  } else if (check == "majorization") {
    vopt::Vector scale;
    if (scale_L) scale = vopt::Vector::Constant(cone.rows(), *scale_L);
    else if (p.ell) scale = cone.transform() * *p.ell;
    else throw vopt::ConfigError("--L is required for a problem without ell");
    bool pass = true;
    for (const auto& rec : lt.trace.records) {
      pass = pass && vopt::surrogate_majorization_check(p, cone, rec.x, scale, samples);
    }
    report["scale"] = vec_json(scale);
    report["pass"] = pass;
  } else {
    throw vopt::ConfigError("unknown check '" + check + "' (expected rate, u0 or majorization)");
  }
  std::cout << report.dump(2) << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"vector optimization solvers over polyhedral cones"};
  app.require_subcommand(1);

  SolverFlags flags;

  auto* bench = app.add_subcommand("bench", "run a benchmark table from a config file");
  std::string config_path, out_dir;
  std::optional<std::uint64_t> bench_seed;
  std::optional<int> bench_runs;
  int jobs = 1;
  bench->add_option("--config", config_path, "experiment config")->required();
  bench->add_option("--seed", bench_seed, "master seed");
  bench->add_option("--runs", bench_runs, "runs per cell");
  bench->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  bench->add_option("--out", out_dir, "directory for csv/json/markdown tables");
  flags.attach(bench);

  auto* runc = app.add_subcommand("run", "solve once and print a summary");
  std::string problem, cone = "R2+", algo = "bbdvo", trace_path, transform = "A";
  std::uint64_t seed = 0;
  runc->add_option("--problem", problem, "problem name")->required();
  runc->add_option("--cone", cone, "R2+, K1 or K2");
  runc->add_option("--algo", algo, "sdvo, bbdvo, edvo, mm-fixed-l, mm-ell, mm-ell-base");
  runc->add_option("--transform", transform, "A or Ahat");
  runc->add_option("--seed", seed, "start seed");
  runc->add_option("--trace", trace_path, "write a JSONL trace");
  flags.attach(runc);

  auto* pareto = app.add_subcommand("pareto", "export terminal value-space points");
  int runs = 200;
  double radius = 1e-3;
  std::string pareto_out;
  std::uint64_t pareto_seed = 42;
  pareto->add_option("--problem", problem, "problem name")->required();
  pareto->add_option("--cone", cone, "R2+, K1 or K2");
  pareto->add_option("--algo", algo, "algorithm");
  pareto->add_option("--transform", transform, "A or Ahat");
  pareto->add_option("--runs", runs, "number of starts");
  pareto->add_option("--seed", pareto_seed, "master seed");
  pareto->add_option("--radius", radius, "cluster radius");
  pareto->add_option("--out", pareto_out, "CSV path (stdout if omitted)");
  flags.attach(pareto);

  auto* analyze = app.add_subcommand("analyze", "check a trace against theoretical bounds");
  std::string check;
  std::optional<double> rate, scale_L;
  int grid = 101, samples = 1000;
  analyze->add_option("--trace", trace_path, "JSONL trace")->required();
  analyze->add_option("--check", check, "rate, u0 or majorization")->required();
  analyze->add_option("--rate", rate, "contraction bound for --check rate");
  analyze->add_option("--L", scale_L, "uniform scale for --check majorization");
  analyze->add_option("--grid", grid, "grid points per axis for --check u0");
  analyze->add_option("--samples", samples, "samples per iterate for --check majorization");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  auto parse_transform = [](const std::string& t) {
    if (t == "A") return false;
    if (t == "Ahat") return true;
    throw vopt::ConfigError("unknown transform '" + t + "'");
  };

  try {
    if (*bench) return cmd_bench(config_path, bench_seed, bench_runs, jobs, out_dir, flags);
    if (*runc) return cmd_run(problem, cone, algo, parse_transform(transform), seed, trace_path, flags);
    if (*pareto) {
      return cmd_pareto(problem, cone, algo, parse_transform(transform), runs, pareto_seed, radius,
                        pareto_out, flags);
    }
    if (*analyze) return cmd_analyze(trace_path, check, rate, scale_L, grid, samples);
  } catch (const vopt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const vopt::DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRun;
  }
  return 0;
}
