#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "vopt/cone.hpp"
#include "vopt/error.hpp"
#include "vopt/problem.hpp"
#include "vopt/problems.hpp"
#include "vopt/solver.hpp"

namespace vopt {

/// One benchmark column: an algorithm, optionally with the start-point
/// row scaling of the transform.
struct BenchColumn {
  Algorithm algorithm = Algorithm::SDVO;
  bool scaled = false;

  bool operator==(const BenchColumn&) const = default;
};

inline BenchColumn parse_column(const std::string& token) {
  const auto colon = token.find(':');
  BenchColumn c;
  c.algorithm = parse_algorithm(token.substr(0, colon));
  if (colon != std::string::npos) {
    const std::string t = token.substr(colon + 1);
    if (t == "Ahat" || t == "hat") c.scaled = true;
    else if (t != "A") throw ConfigError("unknown transform '" + t + "' (expected A or Ahat)");
  }
  if (c.scaled && !uses_line_search(c.algorithm)) {
    throw ConfigError("scaled transform is only meaningful for sdvo, bbdvo and edvo");
  }
  return c;
}

inline std::string to_string(const BenchColumn& c) {
  return std::string(to_string(c.algorithm)) + (c.scaled ? ":Ahat" : ":A");
}

struct BenchConfig {
  std::string name = "benchmark";
  std::vector<std::string> problems;
  std::vector<std::string> cones = {"R2+"};
  std::vector<BenchColumn> columns;
  int runs = 200;
  std::uint64_t seed = 42;
  SolverConfig solver; ///< algorithm and cone are set per cell

  /// Resolves every name; throws ConfigError before any run starts.
  void validate() const {
    if (runs < 0) throw ConfigError("runs must be nonnegative");
    if (problems.empty()) throw ConfigError("no problems configured");
    if (cones.empty()) throw ConfigError("no cones configured");
    if (columns.empty()) throw ConfigError("no algorithm columns configured");
    for (const auto& p : problems) (void)problems::by_name(p);
    for (const auto& c : cones) (void)PolyhedralCone::by_name(c);
    solver.validate();
  }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream is(s);
  while (is >> tok) {
    std::string piece;
    std::istringstream parts(tok);
    while (std::getline(parts, piece, ',')) {
      if (!piece.empty()) out.push_back(piece);
    }
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream is(value);
  T out{};
  is >> out;
  if (is.fail() || !is.eof()) throw ConfigError("bad value for '" + key + "': '" + value + "'");
  return out;
}

} // namespace detail

/// Applies one `key = value` solver override (shared by config files and CLI flags).
inline void apply_solver_option(SolverConfig& s, const std::string& key, const std::string& value) {
  using detail::parse_number;
  if (key == "tolerance") s.tolerance = parse_number<double>(key, value);
  else if (key == "max_iter") s.max_iter = parse_number<int>(key, value);
  else if (key == "line_search") s.line_search = parse_line_search(value);
  else if (key == "sigma") s.ls.sigma = parse_number<double>(key, value);
  else if (key == "gamma") s.ls.gamma = parse_number<double>(key, value);
  else if (key == "jmax") s.ls.jmax = parse_number<int>(key, value);
  else if (key == "alpha_min") s.alpha_bounds.min = parse_number<double>(key, value);
  else if (key == "alpha_max") s.alpha_bounds.max = parse_number<double>(key, value);
  else if (key == "L") s.fixed_L = parse_number<double>(key, value);
  else throw ConfigError("unknown solver option '" + key + "'");
}

/// Sectioned key-value config:
///
///   [experiment]  name, runs, seed, problems, cones, columns
///   [solver]      tolerance, max_iter, line_search, sigma, gamma, jmax,
///                 alpha_min, alpha_max, L
///
/// Lists are separated by spaces or commas; columns look like `sdvo:Ahat`.
inline BenchConfig parse_bench_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  BenchConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("key '" + section + "' outside of a section");
    }
    for (const auto& [key, node] : body) {
      const std::string value = node.get_value<std::string>();
      if (section == "experiment") {
        if (key == "name") cfg.name = value;
        else if (key == "runs") cfg.runs = detail::parse_number<int>(key, value);
        else if (key == "seed") cfg.seed = detail::parse_number<std::uint64_t>(key, value);
        else if (key == "problems") cfg.problems = detail::split_list(value);
        else if (key == "cones") cfg.cones = detail::split_list(value);
        else if (key == "columns") {
          cfg.columns.clear();
          for (const auto& tok : detail::split_list(value)) cfg.columns.push_back(parse_column(tok));
        } else throw ConfigError("unknown experiment option '" + key + "'");
      } else if (section == "solver") {
        apply_solver_option(cfg.solver, key, value);
      } else {
        throw ConfigError("unknown config section '" + section + "'");
      }
    }
  }
  return cfg;
}

inline BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_bench_config(in);
}

/// Seed of the r-th start. Depends only on the master seed and r, so every
/// algorithm column sees the same starts.
inline std::uint64_t run_seed(std::uint64_t master, int r) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(r) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Table label of a transform: A0/A1/A2 for the three named cones, with a
/// "hat" suffix for the scaled variant.
inline std::string transform_label(const std::string& cone, bool scaled) {
  std::string base = "A";
  if (cone == "R2+") base = "A0";
  else if (cone == "K1") base = "A1";
  else if (cone == "K2") base = "A2";
  return scaled ? base + "hat" : base;
}

struct BenchCell {
  std::string problem;
  std::string cone;
  BenchColumn column;
};

struct RunOutcome {
  int iterations = 0;
  std::size_t fevals = 0;
  double wall_ms = 0.0;
  std::string status; ///< termination tag, or "numeric_failure"
  Vector f_final;
  Vector x_final;
  double final_dnorm = 0.0;

  bool failed() const { return status != "stationary"; }
};

/// Solves one (problem, cone, column) cell from the given start. Numeric
/// failures are folded into the outcome rather than thrown.
inline RunOutcome run_cell(const VectorProblem& p, const PolyhedralCone& cone, const BenchColumn& column,
                           const SolverConfig& base, const StartPair& start, SolveTrace* trace_out = nullptr) {
  SolverConfig cfg = base;
  cfg.algorithm = column.algorithm;
  cfg.cone = column.scaled ? scaled_transform(cone, p, start.x0) : cone;
  SolveTrace trace;
  RunOutcome out;
  try {
    trace = run(cfg, p, start);
    out.status = to_string(trace.termination);
  } catch (const SolveError& e) {
    trace = e.partial();
    out.status = "numeric_failure";
  }
  out.iterations = trace.iterations;
  out.fevals = trace.fevals;
  out.wall_ms = trace.wall_ms;
  if (!trace.records.empty()) {
    out.f_final = trace.f_final();
    out.x_final = trace.x_final();
    out.final_dnorm = trace.final_dnorm();
  }
  if (trace_out) *trace_out = std::move(trace);
  return out;
}

struct BenchmarkRow {
  std::string problem;
  std::string cone;
  std::string algorithm;
  std::string transform;
  double iter = 0.0;
  double feval = 0.0;
  double time_ms = 0.0;
  int failures = 0;
  int runs = 0;
};

/// Called once per finished run with its full trace; serialized by a mutex.
using RunObserver = std::function<void(const BenchCell&, int run, const SolveTrace&)>;

/// Runs every (problem, cone, column) cell over `runs` seeded starts on
/// `jobs` worker threads. Aggregation is in run order, so rows do not depend
/// on the thread count apart from the time column.
inline std::vector<BenchmarkRow> run_benchmark(const BenchConfig& cfg, int jobs = 1,
                                               const RunObserver& observer = {}) {
  cfg.validate();
  if (jobs < 1) throw ConfigError("jobs must be at least 1");

  std::vector<VectorProblem> probs;
  for (const auto& name : cfg.problems) probs.push_back(problems::by_name(name));
  std::vector<PolyhedralCone> cones;
  for (const auto& name : cfg.cones) cones.push_back(PolyhedralCone::by_name(name));
  for (const auto& p : probs) {
    for (const auto& k : cones) {
      if (k.dim() != p.m) throw ConfigError("cone " + k.name() + " does not fit problem " + p.name);
    }
  }

  std::vector<BenchCell> cells;
  std::vector<std::pair<std::size_t, std::size_t>> cell_index; // (problem, cone)
  for (std::size_t pi = 0; pi < probs.size(); ++pi)
    for (std::size_t ci = 0; ci < cones.size(); ++ci)
      for (const auto& col : cfg.columns) {
        cells.push_back({probs[pi].name, cones[ci].name(), col});
        cell_index.emplace_back(pi, ci);
      }

  const std::size_t runs = static_cast<std::size_t>(cfg.runs);
  const std::size_t total = cells.size() * runs;
  std::vector<RunOutcome> outcomes(total);
  std::vector<std::string> errors(total);
  std::atomic<std::size_t> next{0};
  std::mutex observer_mutex;

  auto worker = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      const std::size_t c = task / runs;
      const int r = static_cast<int>(task % runs);
      const auto [pi, ci] = cell_index[c];
      try {
        const StartPair start = sample_start(probs[pi], run_seed(cfg.seed, r));
        SolveTrace trace;
        outcomes[task] = run_cell(probs[pi], cones[ci], cells[c].column, cfg.solver, start,
                                  observer ? &trace : nullptr);
        if (observer) {
          std::lock_guard<std::mutex> lock(observer_mutex);
          observer(cells[c], r, trace);
        }
      } catch (const std::exception& e) {
        errors[task] = e.what();
      }
    }
  };

  const int n_threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(total, 1)));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error("benchmark run failed: " + e);
  }

  std::vector<BenchmarkRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    BenchmarkRow row;
    row.problem = cells[c].problem;
    row.cone = cells[c].cone;
    row.algorithm = to_string(cells[c].column.algorithm);
    row.transform = transform_label(cells[c].cone, cells[c].column.scaled);
    row.runs = cfg.runs;
    double it = 0.0, fe = 0.0, ms = 0.0;
    for (std::size_t r = 0; r < runs; ++r) {
      const RunOutcome& o = outcomes[c * runs + r];
      it += o.iterations;
      fe += static_cast<double>(o.fevals);
      ms += o.wall_ms;
      row.failures += o.failed() ? 1 : 0;
    }
    if (runs > 0) {
      row.iter = it / static_cast<double>(runs);
      row.feval = fe / static_cast<double>(runs);
      row.time_ms = ms / static_cast<double>(runs);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

enum class TableFormat { Csv, Json, Markdown };

inline TableFormat parse_table_format(const std::string& s) {
  if (s == "csv") return TableFormat::Csv;
  if (s == "json") return TableFormat::Json;
  if (s == "markdown" || s == "md") return TableFormat::Markdown;
  throw ConfigError("unknown table format '" + s + "'");
}

inline const std::vector<std::string>& table_columns() {
  static const std::vector<std::string> cols = {"problem", "cone",    "algorithm", "transform",
                                                "iter",    "feval",   "time_ms",   "failures"};
  return cols;
}

inline void export_table(const std::vector<BenchmarkRow>& rows, TableFormat format, std::ostream& os) {
  const auto& cols = table_columns();
  switch (format) {
  case TableFormat::Csv: {
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    os << std::setprecision(17);
    for (const auto& r : rows) {
      os << r.problem << ',' << r.cone << ',' << r.algorithm << ',' << r.transform << ',' << r.iter << ','
         << r.feval << ',' << r.time_ms << ',' << r.failures << '\n';
    }
    break;
  }
  case TableFormat::Json: {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      arr.push_back({{"problem", r.problem},
                     {"cone", r.cone},
                     {"algorithm", r.algorithm},
                     {"transform", r.transform},
                     {"iter", r.iter},
                     {"feval", r.feval},
                     {"time_ms", r.time_ms},
                     {"failures", r.failures}});
    }
    os << arr.dump(2) << '\n';
    break;
  }
  case TableFormat::Markdown: {
    os << '|';
    for (const auto& c : cols) os << ' ' << c << " |";
    os << "\n|";
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i < 4 ? "---|" : "---:|");
    os << '\n' << std::fixed << std::setprecision(2);
    for (const auto& r : rows) {
      os << "| " << r.problem << " | " << r.cone << " | " << r.algorithm << " | " << r.transform << " | "
         << r.iter << " | " << r.feval << " | " << r.time_ms << " | " << r.failures << " |\n";
    }
    os << std::defaultfloat;
    break;
  }
  }
}

inline void export_table(const std::vector<BenchmarkRow>& rows, TableFormat format, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write '" + path + "'");
  export_table(rows, format, os);
  if (!os) throw Error("write to '" + path + "' failed");
}

/// Reads the CSV written by export_table.
inline std::vector<BenchmarkRow> read_table_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty table");
  std::vector<BenchmarkRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string piece;
    std::istringstream ls(line);
    while (std::getline(ls, piece, ',')) f.push_back(piece);
    if (f.size() != table_columns().size()) throw ConfigError("malformed table row: " + line);
    BenchmarkRow r;
    r.problem = f[0];
    r.cone = f[1];
    r.algorithm = f[2];
    r.transform = f[3];
    r.iter = std::stod(f[4]);
    r.feval = std::stod(f[5]);
    r.time_ms = std::stod(f[6]);
    r.failures = std::stoi(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

struct ParetoPoint {
  Vector f;
  std::string status;
  double dnorm = 0.0;
  Vector x;
};

/// Terminal value-space points of `runs` seeded solves.
inline std::vector<ParetoPoint> collect_pareto_points(const VectorProblem& p, const PolyhedralCone& cone,
                                                      const BenchColumn& column, int runs,
                                                      std::uint64_t seed, const SolverConfig& base = {}) {
  if (p.m != 2) throw ConfigError("pareto export supports m = 2 only");
  if (runs < 0) throw ConfigError("runs must be nonnegative");
  std::vector<ParetoPoint> pts;
  for (int r = 0; r < runs; ++r) {
    const RunOutcome o = run_cell(p, cone, column, base, sample_start(p, run_seed(seed, r)));
    if (o.f_final.size() == 0) continue;
    pts.push_back({o.f_final, o.status, o.final_dnorm, o.x_final});
  }
  return pts;
}

/// Number of connected components of the graph joining points at Euclidean
/// distance <= radius.
inline int cluster_count(const std::vector<ParetoPoint>& pts, double radius = 1e-3) {
  std::vector<std::size_t> parent(pts.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if ((pts[i].f - pts[j].f).norm() <= radius) parent[find(i)] = find(j);
  int count = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) count += find(i) == i ? 1 : 0;
  return count;
}

/// CSV `f1,f2,termination`, then `# clusters=<n> radius=<r>`.
inline void export_pareto_points(const std::vector<ParetoPoint>& pts, std::ostream& os, double radius = 1e-3) {
  os << "f1,f2,termination\n" << std::setprecision(17);
  for (const auto& pt : pts) os << pt.f(0) << ',' << pt.f(1) << ',' << pt.status << '\n';
  os << "# clusters=" << cluster_count(pts, radius) << " radius=" << radius << '\n';
}

// Trace JSONL: a "meta" line, one "iter" line per record, a "summary" line.

inline nlohmann::json to_json(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Vector vector_from_json(const nlohmann::json& j) {
  const auto vals = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
}

inline void write_trace(const SolveTrace& trace, const Matrix& transform, std::ostream& os) {
  nlohmann::json meta = {{"type", "meta"},
                         {"problem", trace.problem},
                         {"cone", trace.cone},
                         {"algorithm", to_string(trace.algorithm)}};
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < transform.rows(); ++i) rows.push_back(to_json(transform.row(i).transpose()));
  meta["transform"] = rows;
  os << meta.dump() << '\n';
  for (const auto& r : trace.records) {
    nlohmann::json j = {{"type", "iter"}, {"k", r.k},       {"x", to_json(r.x)},   {"f", to_json(r.f)},
                        {"d", to_json(r.d)}, {"dnorm", r.dnorm}, {"t", r.t},     {"trials", r.trials}};
    if (r.alpha) {
      j["alpha"] = to_json(*r.alpha);
      j["alpha_at_bound"] = r.alpha_at_bound;
    }
    os << j.dump() << '\n';
  }
  os << nlohmann::json{{"type", "summary"},
                       {"termination", to_string(trace.termination)},
                       {"iterations", trace.iterations},
                       {"fevals", trace.fevals},
                       {"wall_ms", trace.wall_ms},
                       {"message", trace.message}}
            .dump()
     << '\n';
}

struct LoadedTrace {
  SolveTrace trace;
  Matrix transform;
};

inline LoadedTrace read_trace(std::istream& is) {
  LoadedTrace out;
  std::string line;
  bool have_meta = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad trace line: ") + e.what());
    }
    const std::string type = j.value("type", "");
    if (type == "meta") {
      have_meta = true;
      out.trace.problem = j.at("problem").get<std::string>();
      out.trace.cone = j.at("cone").get<std::string>();
      out.trace.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
      const auto& rows = j.at("transform");
      if (!rows.empty()) {
        out.transform.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
          out.transform.row(static_cast<Index>(i)) = vector_from_json(rows[i]).transpose();
        }
      }
    } else if (type == "iter") {
      IterationRecord r;
      r.k = j.at("k").get<int>();
      r.x = vector_from_json(j.at("x"));
      r.f = vector_from_json(j.at("f"));
      r.d = vector_from_json(j.at("d"));
      r.dnorm = j.at("dnorm").get<double>();
      r.t = j.at("t").get<double>();
      r.trials = j.at("trials").get<int>();
      if (j.contains("alpha")) {
        r.alpha = vector_from_json(j.at("alpha"));
        r.alpha_at_bound = j.value("alpha_at_bound", false);
      }
      out.trace.records.push_back(std::move(r));
    } else if (type == "summary") {
      const std::string term = j.at("termination").get<std::string>();
      if (term == "stationary") out.trace.termination = Termination::Stationary;
      else if (term == "max_iter") out.trace.termination = Termination::MaxIter;
      else out.trace.termination = Termination::LineSearchFailure;
      out.trace.iterations = j.at("iterations").get<int>();
      out.trace.fevals = j.at("fevals").get<std::size_t>();
      out.trace.wall_ms = j.at("wall_ms").get<double>();
      out.trace.message = j.value("message", "");
    } else {
      throw ConfigError("unknown trace record type '" + type + "'");
    }
  }
  if (!have_meta) throw ConfigError("trace has no meta line");
  if (out.trace.records.empty()) throw ConfigError("trace has no iteration records");
  return out;
}

} // namespace vopt
