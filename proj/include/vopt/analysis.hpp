#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "vopt/cone.hpp"
#include "vopt/error.hpp"
#include "vopt/problem.hpp"
#include "vopt/solver.hpp"
#include "vopt/types.hpp"

namespace vopt {

/// kappa = max_i <A_i, ell> / <A_i, mu> over the rows of A.
inline double condition_number(const OrderVector& mu, const OrderVector& ell, const PolyhedralCone& cone) {
  if (mu.size() != cone.dim() || ell.size() != cone.dim()) {
    throw DimensionError("condition_number: mu/ell size does not match cone");
  }
  const Vector num = cone.transform() * ell;
  const Vector den = cone.transform() * mu;
  double kappa = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < cone.rows(); ++i) {
    if (!(den(i) > 0.0)) throw NumericError("condition_number: mu is not interior (<A_i, mu> <= 0)");
    kappa = std::max(kappa, num(i) / den(i));
  }
  return kappa;
}

/// mu_min = min_i <A_i, mu>, ell_max = max_i <A_i, ell>.
inline double mu_min(const OrderVector& mu, const PolyhedralCone& cone) {
  return (cone.transform() * mu).minCoeff();
}
inline double ell_max(const OrderVector& ell, const PolyhedralCone& cone) {
  return (cone.transform() * ell).maxCoeff();
}

struct RateViolation {
  int k = 0;
  double ratio = 0.0;
  double bound = 0.0;
};

struct RateReport {
  std::vector<double> ratios; ///< ||x^{k+1} - x*|| / ||x^k - x*||, checked steps only
  std::vector<int> steps;     ///< k for each ratio
  double bound = 0.0;
  std::vector<RateViolation> violations;
  bool pass = true;

  double max_ratio() const {
    return ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
  }
};

/// Per-step check ||x^{k+1} - x*|| <= rate (1 + slack) ||x^k - x*||. Steps
/// where ||x^k - x*|| is at rounding level relative to ||x*|| are skipped.
inline RateReport verify_linear_rate(const SolveTrace& trace, const Vector& xstar, double rate,
                                     double slack = 1e-6) {
  if (!(rate > 0.0 && rate <= 1.0)) throw ConfigError("rate must lie in (0, 1]");
  RateReport rep;
  rep.bound = rate;
  const double floor = 10.0 * std::numeric_limits<double>::epsilon() * std::max(xstar.norm(), 1e-300);
  for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
    const double ek = (trace.records[k].x - xstar).norm();
    if (!(ek > floor)) continue;
    const double ek1 = (trace.records[k + 1].x - xstar).norm();
    const double ratio = ek1 / ek;
    rep.ratios.push_back(ratio);
    rep.steps.push_back(static_cast<int>(k));
    if (ratio > rate * (1.0 + slack)) {
      rep.violations.push_back({static_cast<int>(k), ratio, rate});
      rep.pass = false;
    }
  }
  return rep;
}

/// Tensor grid of `per_axis` points per coordinate over the problem box.
/// Only for n = 2.
inline std::vector<Vector> box_grid(const VectorProblem& p, int per_axis = 101) {
  if (p.n != 2) throw ConfigError("grid estimates are only supported for n = 2");
  if (per_axis < 2) throw ConfigError("grid needs at least two points per axis");
  std::vector<Vector> grid;
  grid.reserve(static_cast<std::size_t>(per_axis) * static_cast<std::size_t>(per_axis));
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      Vector x(2);
      x(0) = p.lower(0) + (p.upper(0) - p.lower(0)) * i / (per_axis - 1);
      x(1) = p.lower(1) + (p.upper(1) - p.lower(1)) * j / (per_axis - 1);
      grid.push_back(std::move(x));
    }
  }
  return grid;
}

/// Objective values on a grid, computed once and reused.
struct GridValues {
  std::vector<Vector> points;
  std::vector<Vector> values;
};

inline GridValues evaluate_grid(const VectorProblem& p, std::vector<Vector> grid) {
  GridValues gv;
  gv.values.reserve(grid.size());
  for (const auto& y : grid) gv.values.push_back(evaluate(p, y));
  gv.points = std::move(grid);
  return gv;
}

/// Lower bound on u0(x): max over grid y of min_i <A_i, F(x) - F(y)>.
inline double u0_grid_estimate(const Vector& fx, const GridValues& grid, const PolyhedralCone& cone) {
  if (grid.values.empty()) throw ConfigError("u0 estimate needs a nonempty grid");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& fy : grid.values) {
    best = std::max(best, (cone.transform() * (fx - fy)).minCoeff());
  }
  return best;
}

inline double u0_grid_estimate(const Vector& x, const VectorProblem& p, const PolyhedralCone& cone,
                               const std::vector<Vector>& grid) {
  return u0_grid_estimate(evaluate(p, x), evaluate_grid(p, grid), cone);
}

/// Diameter estimate of {y : F(y) <= F(x0)}: max pairwise distance among grid
/// points in the level set.
inline double level_set_diameter(const Vector& f0, const GridValues& grid, const PolyhedralCone& cone) {
  std::vector<const Vector*> inside;
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    if (cone_leq(grid.values[i], f0, cone)) inside.push_back(&grid.points[i]);
  }
  double diam = 0.0;
  for (std::size_t i = 0; i < inside.size(); ++i)
    for (std::size_t j = i + 1; j < inside.size(); ++j)
      diam = std::max(diam, (*inside[i] - *inside[j]).squaredNorm());
  return std::sqrt(diam);
}

/// Samples x in the box and checks
/// A (F(x) - F(xk)) <= A JF(xk) (x - xk) + 0.5 ||x - xk||^2 scale, componentwise,
/// up to a relative rounding allowance of 1e-12.
inline bool surrogate_majorization_check(const VectorProblem& p, const PolyhedralCone& cone,
                                         const Vector& xk, const Vector& scale, int samples,
                                         std::uint64_t seed = 7) {
  if (scale.size() != cone.rows()) throw DimensionError("majorization check: scale size mismatch");
  const Matrix& a = cone.transform();
  const Vector fk = evaluate(p, xk);
  const Matrix rows = a * jacobian(p, xk);
  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    Vector x(p.n);
    for (Index k = 0; k < p.n; ++k) {
      x(k) = p.lower(k) + (p.upper(k) - p.lower(k)) * detail::unit_uniform(rng);
    }
    const Vector step = x - xk;
    const Vector lhs = a * (evaluate(p, x) - fk);
    const Vector lin = rows * step;
    const Vector quad = 0.5 * step.squaredNorm() * scale;
    const Vector rhs = lin + quad;
    for (Index i = 0; i < lhs.size(); ++i) {
      const double allowance = 1e-12 * (std::abs(lhs(i)) + std::abs(lin(i)) + std::abs(quad(i)) + 1.0);
      if (lhs(i) > rhs(i) + allowance) return false;
    }
  }
  return true;
}

} // namespace vopt
