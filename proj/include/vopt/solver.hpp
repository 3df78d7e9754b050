#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vopt/cone.hpp"
#include "vopt/error.hpp"
#include "vopt/problem.hpp"
#include "vopt/stepsize.hpp"
#include "vopt/subproblem.hpp"
#include "vopt/types.hpp"

namespace vopt {

/// Iteration schemes.
///
///  - SDVO: steepest descent over the base conv{A_i}, with line search
///    (Armijo, or the majorization test with e = (1, ..., 1)).
///  - BBDVO: rows rescaled by the clamped BB scalars, with line search.
///  - EDVO: rows normalized to unit length, with line search.
///  - MMFixedL: surrogate JF d + (L/2)||d||^2 e, unit step.
///  - MMEll: surrogate JF d + 0.5 ||d||^2 ell over the base conv{A_i}, unit step.
///  - MMEllBase: same surrogate over the base {c : <c, ell> = 1}, i.e. rows
///    divided by <A_i, ell>, unit step.
enum class Algorithm { SDVO, BBDVO, EDVO, MMFixedL, MMEll, MMEllBase };

inline const char* to_string(Algorithm a) {
  switch (a) {
  case Algorithm::SDVO: return "sdvo";
  case Algorithm::BBDVO: return "bbdvo";
  case Algorithm::EDVO: return "edvo";
  case Algorithm::MMFixedL: return "mm-fixed-l";
  case Algorithm::MMEll: return "mm-ell";
  case Algorithm::MMEllBase: return "mm-ell-base";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  std::string k;
  for (char c : s) k += static_cast<char>(c == '_' ? '-' : std::tolower(static_cast<unsigned char>(c)));
  if (k == "sdvo" || k == "sd") return Algorithm::SDVO;
  if (k == "bbdvo" || k == "bb") return Algorithm::BBDVO;
  if (k == "edvo" || k == "ed") return Algorithm::EDVO;
  if (k == "mm-fixed-l") return Algorithm::MMFixedL;
  if (k == "mm-ell") return Algorithm::MMEll;
  if (k == "mm-ell-base") return Algorithm::MMEllBase;
  throw ConfigError("unknown algorithm '" + s + "'");
}

inline LineSearchKind parse_line_search(const std::string& s) {
  if (s == "armijo") return LineSearchKind::Armijo;
  if (s == "mm" || s == "majorization") return LineSearchKind::Majorization;
  throw ConfigError("unknown line search '" + s + "' (expected armijo or mm)");
}

inline bool uses_line_search(Algorithm a) {
  return a == Algorithm::SDVO || a == Algorithm::BBDVO || a == Algorithm::EDVO;
}

struct SolverConfig {
  Algorithm algorithm = Algorithm::BBDVO;
  PolyhedralCone cone = PolyhedralCone::nonnegative_orthant(2);
  double tolerance = 1e-6;
  int max_iter = 500;
  LineSearchKind line_search = LineSearchKind::Armijo;
  LineSearchParams ls;
  AlphaBounds alpha_bounds;
  std::optional<double> fixed_L; ///< MMFixedL only
  FrankWolfeOptions fw;

  void validate() const {
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
    if (!(ls.gamma > 0.0 && ls.gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    if (!(ls.sigma > 0.0 && ls.sigma < 1.0)) throw ConfigError("sigma must lie in (0, 1)");
    if (!(alpha_bounds.min > 0.0 && alpha_bounds.min < alpha_bounds.max)) {
      throw ConfigError("need 0 < alpha_min < alpha_max");
    }
  }
};

enum class Termination { Stationary, MaxIter, LineSearchFailure };

inline const char* to_string(Termination t) {
  switch (t) {
  case Termination::Stationary: return "stationary";
  case Termination::MaxIter: return "max_iter";
  case Termination::LineSearchFailure: return "linesearch_failure";
  }
  return "?";
}

/// One direction computation at x^k. The terminal record (stationary or
/// max_iter) has t = 0 and no trials.
struct IterationRecord {
  int k = 0;
  Vector x;
  Vector f;
  Vector d;
  double dnorm = 0.0;
  double t = 0.0;
  int trials = 0;
  std::optional<Vector> alpha;
  bool alpha_at_bound = false;
};

struct SolveTrace {
  std::string problem;
  std::string cone;
  Algorithm algorithm = Algorithm::BBDVO;
  std::vector<IterationRecord> records;
  Termination termination = Termination::MaxIter;
  std::string message;
  int iterations = 0;      ///< steps taken
  std::size_t fevals = 0;  ///< line-search (or unit-step) objective evaluations
  std::size_t jevals = 0;  ///< Jacobian evaluations, not part of fevals
  double wall_ms = 0.0;

  const Vector& x_final() const { return records.back().x; }
  const Vector& f_final() const { return records.back().f; }
  double final_dnorm() const { return records.back().dnorm; }
};

/// Raised when an iterate or objective value turns non-finite; carries the
/// trace up to the failure.
class SolveError : public NumericError {
public:
  SolveError(const std::string& what, SolveTrace partial)
      : NumericError(what), partial_(std::move(partial)) {}
  const SolveTrace& partial() const noexcept { return partial_; }

private:
  SolveTrace partial_;
};

/// L_max = max_i <A_i, ell>.
inline double max_row_pairing(const PolyhedralCone& cone, const OrderVector& v) {
  return (cone.transform() * v).maxCoeff();
}

/// Fixed per-row scales for the unit-step variants: L for MMFixedL,
/// <A_i, ell> for MMEll and MMEllBase, ones for SDVO.
inline Vector strategy_alpha(const SolverConfig& cfg, const PolyhedralCone& cone,
                             const VectorProblem& p) {
  const Index l = cone.rows();
  switch (cfg.algorithm) {
  case Algorithm::SDVO:
    return Vector::Ones(l);
  case Algorithm::MMFixedL: {
    if (!cfg.fixed_L) throw ConfigError("mm-fixed-l requires L");
    if (!(*cfg.fixed_L > 0.0)) throw ConfigError("L must be positive");
    if (p.ell && *cfg.fixed_L < max_row_pairing(cone, *p.ell)) {
      throw ConfigError("L is below L_max = max_i <A_i, ell>; the surrogate would not majorize");
    }
    return Vector::Constant(l, *cfg.fixed_L);
  }
  case Algorithm::MMEll:
  case Algorithm::MMEllBase: {
    if (!p.ell) throw ConfigError(std::string(to_string(cfg.algorithm)) + " requires a problem with ell");
    Vector s = cone.transform() * *p.ell;
    if (!(s.array() > 0.0).all()) throw ConfigError("<A_i, ell> must be positive for every row");
    return s;
  }
  case Algorithm::BBDVO:
  case Algorithm::EDVO:
    break;
  }
  throw ConfigError(std::string(to_string(cfg.algorithm)) + " has no fixed row scale");
}

/// Runs one solve from `start` and returns the full trace.
///
/// x^{k+1} = x^k + t_k d^k until ||d^k|| <= tol, k = max_iter, or a line-search
/// failure. The first BB step uses (x0, x_prev); if they coincide the BB
/// vector falls back to all ones.
inline SolveTrace run(const SolverConfig& cfg, const VectorProblem& p, const StartPair& start) {
  cfg.validate();
  const PolyhedralCone& cone = cfg.cone;
  if (cone.dim() != p.m) throw DimensionError("cone dimension does not match objective count");
  if (start.x0.size() != p.n) throw DimensionError("start point has wrong dimension");

  const auto t0 = std::chrono::steady_clock::now();
  SolveTrace trace;
  trace.problem = p.name;
  trace.cone = cone.name();
  trace.algorithm = cfg.algorithm;

  const Matrix& a = cone.transform();
  const Index l = cone.rows();
  const bool is_mm = !uses_line_search(cfg.algorithm);
  const Vector fixed_scale = is_mm ? strategy_alpha(cfg, cone, p) : Vector::Ones(l);

  auto fail = [&](const std::string& what) -> SolveError {
    trace.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return SolveError(what, trace);
  };

  try {
    Vector x = start.x0;
    Vector fx = evaluate(p, x);
    Matrix jac = jacobian(p, x);
    ++trace.jevals;

    Vector x_prev;
    Matrix jac_prev;
    if (cfg.algorithm == Algorithm::BBDVO) {
      x_prev = start.x_prev.size() == p.n ? start.x_prev : start.x0;
      jac_prev = jacobian(p, x_prev);
      ++trace.jevals;
    }

    for (int k = 0;; ++k) {
      IterationRecord rec;
      rec.k = k;
      rec.x = x;
      rec.f = fx;

      const Matrix rows = a * jac;
      DirectionResult dir;
      Vector relax = Vector::Ones(l);

      switch (cfg.algorithm) {
      case Algorithm::SDVO:
        dir = direction_from_jacobian(jac, cone, DirectionStrategy::Steepest, {}, cfg.fw);
        break;
      case Algorithm::BBDVO: {
        const Vector s = x - x_prev;
        AlphaVector alpha;
        if (s.squaredNorm() > 0.0) {
          alpha = bb_alpha(s, a * (jac - jac_prev), cfg.alpha_bounds);
        } else {
          alpha.alpha = Vector::Ones(l);
          alpha.provenance.assign(static_cast<std::size_t>(l), Curvature::Positive);
        }
        rec.alpha = alpha.alpha;
        rec.alpha_at_bound = alpha.at_bound();
        relax = alpha.alpha;
        dir = direction_from_jacobian(jac, cone, DirectionStrategy::BarzilaiBorwein, alpha.alpha,
                                      cfg.fw);
        break;
      }
      case Algorithm::EDVO:
        dir = direction_from_jacobian(jac, cone, DirectionStrategy::Equiangular, {}, cfg.fw);
        relax = rows.rowwise().norm();
        break;
      case Algorithm::MMFixedL:
      case Algorithm::MMEllBase:
        dir = direction_from_jacobian(jac, cone, DirectionStrategy::FixedScale, fixed_scale, cfg.fw);
        break;
      case Algorithm::MMEll:
        dir = curvature_weighted_direction(rows, fixed_scale, cfg.fw);
        break;
      }

      rec.d = dir.d;
      rec.dnorm = dir.dnorm;

      if (is_stationary(dir, cfg.tolerance)) {
        trace.records.push_back(std::move(rec));
        trace.termination = Termination::Stationary;
        break;
      }
      if (k >= cfg.max_iter) {
        trace.records.push_back(std::move(rec));
        trace.termination = Termination::MaxIter;
        break;
      }

      double t = 1.0;
      Vector f_new;
      if (is_mm) {
        f_new = evaluate(p, x + dir.d, trace.fevals);
        rec.trials = 1;
      } else {
        const Vector row_products = rows * dir.d;
        try {
          LineSearchResult ls =
              cfg.line_search == LineSearchKind::Armijo
                  ? armijo_search(p, cone, x, fx, dir.d, row_products, cfg.ls)
                  : mm_search(p, cone, x, fx, dir.d, row_products, relax, cfg.ls);
          t = ls.t;
          rec.trials = ls.trials;
          trace.fevals += static_cast<std::size_t>(ls.trials);
          f_new = std::move(ls.f_new);
        } catch (const LineSearchError& e) {
          trace.fevals += static_cast<std::size_t>(e.trials());
          rec.trials = e.trials();
          trace.records.push_back(std::move(rec));
          trace.termination = Termination::LineSearchFailure;
          trace.message = e.what();
          break;
        }
      }
      rec.t = t;
      trace.records.push_back(std::move(rec));
      ++trace.iterations;

      if (cfg.algorithm == Algorithm::BBDVO) {
        x_prev = x;
        jac_prev = jac;
      }
      x = x + t * dir.d;
      fx = std::move(f_new);
      jac = jacobian(p, x);
      ++trace.jevals;
    }
  } catch (const SolveError&) {
    throw;
  } catch (const NumericError& e) {
    throw fail(e.what());
  }

  trace.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return trace;
}

/// Outcome of running BBDVO under two transform matrices of the same cone.
struct InvarianceReport {
  enum class Status { Pass, Fail, InconclusiveClamped };
  Status status = Status::Fail;
  double max_direction_deviation = 0.0;
  bool steps_identical = false;
  int iterations_first = 0;
  int iterations_second = 0;

  bool pass() const { return status == Status::Pass; }
};

inline const char* to_string(InvarianceReport::Status s) {
  switch (s) {
  case InvarianceReport::Status::Pass: return "pass";
  case InvarianceReport::Status::Fail: return "fail";
  case InvarianceReport::Status::InconclusiveClamped: return "inconclusive (clamped)";
  }
  return "?";
}

/// Runs BBDVO with transforms `first` and `second` from the same start and
/// compares direction and step sequences. Passes iff directions agree to
/// `tol` and the step sequences are identical; any BB entry on a clamp
/// makes the comparison inconclusive.
inline InvarianceReport transform_invariance_check(const VectorProblem& p, const PolyhedralCone& first,
                                                   const PolyhedralCone& second,
                                                   const StartPair& start, SolverConfig cfg,
                                                   double tol = 1e-8) {
  cfg.algorithm = Algorithm::BBDVO;
  cfg.cone = first;
  const SolveTrace t1 = run(cfg, p, start);
  cfg.cone = second;
  const SolveTrace t2 = run(cfg, p, start);

  InvarianceReport rep;
  rep.iterations_first = t1.iterations;
  rep.iterations_second = t2.iterations;

  bool clamped = false;
  for (const auto* tr : {&t1, &t2})
    for (const auto& r : tr->records) clamped = clamped || r.alpha_at_bound;

  const std::size_t common = std::min(t1.records.size(), t2.records.size());
  rep.steps_identical = t1.records.size() == t2.records.size();
  for (std::size_t k = 0; k < common; ++k) {
    rep.max_direction_deviation =
        std::max(rep.max_direction_deviation, (t1.records[k].d - t2.records[k].d).norm());
    if (t1.records[k].t != t2.records[k].t) rep.steps_identical = false;
  }

  if (clamped) rep.status = InvarianceReport::Status::InconclusiveClamped;
  else if (rep.steps_identical && rep.max_direction_deviation <= tol) rep.status = InvarianceReport::Status::Pass;
  else rep.status = InvarianceReport::Status::Fail;
  return rep;
}

} // namespace vopt
