#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "vopt/cone.hpp"
#include "vopt/error.hpp"
#include "vopt/problem.hpp"
#include "vopt/types.hpp"

namespace vopt {

struct FrankWolfeOptions {
  double tol = 1e-10;   ///< stop once the duality gap is at most this
  int max_iter = 10000; ///< Frank-Wolfe (major) iterations
};

/// Solution of a direction-finding subproblem.
///
/// `d = -M^T lambda` for the (possibly rescaled) row matrix M that was solved;
/// `theta` is the primal optimal value, which equals -||d||^2 / 2 for every
/// strategy except the curvature-weighted surrogate.
struct DirectionResult {
  Vector d;
  Vector lambda;
  double dnorm = 0.0;
  double theta = 0.0;
  double fw_gap = 0.0;
  int iterations = 0;
  bool converged = true;
};

namespace detail {

struct SimplexQpSolution {
  Vector lambda;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

inline double simplex_qp_value(const Matrix& gram, const Vector& linear, const Vector& lambda) {
  return 0.5 * lambda.dot(gram * lambda) + linear.dot(lambda);
}

// Re-optimizes over the affine hull of the current support, walking back to
// the simplex boundary when the affine minimizer leaves it (Wolfe's minor
// cycle). The step is kept only if it does not increase the objective.
inline void corrective_step(const Matrix& gram, const Vector& linear, Vector& lambda) {
  const Index l = lambda.size();
  const double before = simplex_qp_value(gram, linear, lambda);
  Vector trial = lambda;

  for (Index cycle = 0; cycle < l; ++cycle) {
    std::vector<Index> support;
    for (Index i = 0; i < l; ++i)
      if (trial(i) > 0.0) support.push_back(i);
    const Index s = static_cast<Index>(support.size());
    if (s <= 1) break;

    Matrix kkt = Matrix::Zero(s + 1, s + 1);
    Vector rhs = Vector::Zero(s + 1);
    for (Index a = 0; a < s; ++a) {
      for (Index b = 0; b < s; ++b) kkt(a, b) = gram(support[a], support[b]);
      kkt(a, s) = 1.0;
      kkt(s, a) = 1.0;
      rhs(a) = -linear(support[a]);
    }
    rhs(s) = 1.0;
    const Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    if (!sol.allFinite()) return;
    const Vector w = sol.head(s);

    if ((w.array() > 0.0).all()) {
      trial.setZero();
      for (Index a = 0; a < s; ++a) trial(support[a]) = w(a);
      break;
    }
    double step = 1.0;
    Index blocking = -1;
    for (Index a = 0; a < s; ++a) {
      if (w(a) <= 0.0) {
        const double cur = trial(support[a]);
        const double r = cur / (cur - w(a));
        if (r < step) {
          step = r;
          blocking = a;
        }
      }
    }
    for (Index a = 0; a < s; ++a) {
      double& v = trial(support[a]);
      v += step * (w(a) - v);
      if (a == blocking || v < 1e-15) v = 0.0;
    }
    trial /= trial.sum();
  }

  if (simplex_qp_value(gram, linear, trial) <= before) lambda = trial;
}

// min 0.5 lambda^T G lambda + c^T lambda over the unit simplex, G = M M^T.
// Frank-Wolfe with exact line search and smallest-index tie breaking, each
// major step followed by a corrective step on the support.
inline SimplexQpSolution solve_simplex_qp(const Matrix& gram, const Vector& linear,
                                          const FrankWolfeOptions& opts) {
  const Index l = gram.rows();
  SimplexQpSolution out;
  out.lambda = Vector::Constant(l, 1.0 / static_cast<double>(l));
  if (l == 1) {
    out.converged = true;
    return out;
  }
  Vector& lambda = out.lambda;
  for (int it = 0;; ++it) {
    const Vector grad = gram * lambda + linear;
    Index vertex = 0;
    for (Index i = 1; i < l; ++i)
      if (grad(i) < grad(vertex)) vertex = i;
    out.gap = grad.dot(lambda) - grad(vertex);
    out.iterations = it;
    if (out.gap <= opts.tol) {
      out.converged = true;
      return out;
    }
    if (it >= opts.max_iter) return out;

    Vector dir = -lambda;
    dir(vertex) += 1.0;
    const double curvature = dir.dot(gram * dir);
    const double step = curvature > 0.0 ? std::clamp(out.gap / curvature, 0.0, 1.0) : 1.0;
    lambda += step * dir;
    lambda = lambda.cwiseMax(0.0);
    lambda /= lambda.sum();

    corrective_step(gram, linear, lambda);
  }
}

inline void check_rows(const Matrix& m) {
  if (m.rows() < 1 || m.cols() < 1) throw DimensionError("subproblem matrix must be non-empty");
  if (!m.allFinite()) throw NumericError("subproblem matrix has non-finite entries");
}

inline DirectionResult finish(const Matrix& m, Vector lambda, double gap, int iterations,
                              bool converged) {
  DirectionResult r;
  r.d = -(m.transpose() * lambda);
  r.lambda = std::move(lambda);
  r.dnorm = r.d.norm();
  r.theta = -0.5 * r.d.squaredNorm();
  r.fw_gap = gap;
  r.iterations = iterations;
  r.converged = converged;
  return r;
}

} // namespace detail

/// min over lambda in the unit simplex of 0.5 ||M^T lambda||^2, d = -M^T lambda.
/// A non-converged result (gap above tolerance after max_iter) is flagged,
/// not thrown; the caller decides.
inline DirectionResult min_norm_simplex_qp(const Matrix& m, const FrankWolfeOptions& opts = {}) {
  detail::check_rows(m);
  if (!(opts.tol > 0.0)) throw ConfigError("Frank-Wolfe tolerance must be positive");
  const Matrix gram = m * m.transpose();
  auto sol = detail::solve_simplex_qp(gram, Vector::Zero(m.rows()), opts);
  return detail::finish(m, std::move(sol.lambda), sol.gap, sol.iterations, sol.converged);
}

/// Closed-form minimizer for two rows: minimize 0.5 ||t M_1 + (1-t) M_2||^2
/// over t in [0, 1]. Identical rows give t = 1/2.
inline DirectionResult exact_qp_two_rows(const Matrix& m) {
  detail::check_rows(m);
  if (m.rows() != 2) throw DimensionError("exact_qp_two_rows needs exactly two rows");
  const Vector a = m.row(0).transpose();
  const Vector b = m.row(1).transpose();
  const Vector diff = a - b;
  const double den = diff.squaredNorm();
  const double t = den > 0.0 ? std::clamp(-b.dot(diff) / den, 0.0, 1.0) : 0.5;
  Vector lambda{{t, 1.0 - t}};

  const Vector v = m.transpose() * lambda;
  const Vector grad = m * v;
  const double gap = grad.dot(lambda) - grad.minCoeff();
  return detail::finish(m, std::move(lambda), std::max(gap, 0.0), 0, true);
}

/// Chooses the closed form for two rows and Frank-Wolfe otherwise.
inline DirectionResult solve_min_norm(const Matrix& m, const FrankWolfeOptions& opts = {}) {
  return m.rows() == 2 ? exact_qp_two_rows(m) : min_norm_simplex_qp(m, opts);
}

/// Minimizer of max_i <r_i, d> + 0.5 c_i ||d||^2 with all c_i > 0.
///
/// Its dual, min over the simplex of ||R^T lambda||^2 / (c^T lambda), is a
/// convex ratio; it is solved by Dinkelbach's method, each parametric step a
/// simplex QP. Then d = -R^T lambda / (c^T lambda).
inline DirectionResult curvature_weighted_direction(const Matrix& rows, const Vector& curvature,
                                                    const FrankWolfeOptions& opts = {}) {
  detail::check_rows(rows);
  if (curvature.size() != rows.rows()) throw DimensionError("curvature vector size mismatch");
  if (!(curvature.array() > 0.0).all()) throw ConfigError("curvature weights must be positive");

  const Index l = rows.rows();
  const Matrix gram = rows * rows.transpose();
  Vector lambda = Vector::Constant(l, 1.0 / static_cast<double>(l));
  // from R^T lambda, not the Gram form, which cancels badly near stationarity
  auto half_norm = [&](const Vector& lam) { return 0.5 * (rows.transpose() * lam).squaredNorm(); };
  auto ratio = [&](const Vector& lam) { return half_norm(lam) / curvature.dot(lam); };

  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  double level = ratio(lambda);
  for (int outer = 0; outer < 100; ++outer) {
    auto sol = detail::solve_simplex_qp(gram, -level * curvature, opts);
    iterations += sol.iterations;
    gap = sol.gap;
    const double residual = half_norm(sol.lambda) - level * curvature.dot(sol.lambda);
    const double next = ratio(sol.lambda);
    // next <= level in exact arithmetic; an ulp above still means sol.lambda is the better point
    if (next <= level * (1.0 + 1e-12)) lambda = sol.lambda;
    if (residual >= -1e-14 * level * curvature.dot(sol.lambda) || next >= level) {
      converged = sol.converged;
      break;
    }
    level = next;
  }

  DirectionResult r;
  const double weight = curvature.dot(lambda);
  r.d = -(rows.transpose() * lambda) / weight;
  r.lambda = lambda;
  r.dnorm = r.d.norm();
  r.theta = -0.5 * weight * r.d.squaredNorm();
  r.fw_gap = gap;
  r.iterations = iterations;
  r.converged = converged;
  return r;
}

enum class DirectionStrategy {
  Steepest,        ///< rows A_i JF(x)
  BarzilaiBorwein, ///< rows A_i JF(x) / alpha_i
  Equiangular,     ///< rows A_i JF(x) / ||A_i JF(x)||
  FixedScale,      ///< rows A_i JF(x) / s_i for a given scale vector
};

inline const char* to_string(DirectionStrategy s) {
  switch (s) {
  case DirectionStrategy::Steepest: return "steepest";
  case DirectionStrategy::BarzilaiBorwein: return "bb";
  case DirectionStrategy::Equiangular: return "equiangular";
  case DirectionStrategy::FixedScale: return "fixed-scale";
  }
  return "?";
}

/// Rows of norm at most this are dropped from the equiangular hull.
inline constexpr double kEquiangularDropNorm = 1e-14;

/// Direction from a precomputed Jacobian. `row_scale` is the alpha vector for
/// BarzilaiBorwein and the scale vector for FixedScale; it is ignored otherwise.
///
/// Rescaled strategies form diag(1/s) A first and then multiply by JF, so a
/// BB direction is bitwise identical to a steepest direction computed with the
/// pre-scaled cone.
inline DirectionResult direction_from_jacobian(const Matrix& jac, const PolyhedralCone& cone,
                                               DirectionStrategy strategy,
                                               const std::optional<Vector>& row_scale = {},
                                               const FrankWolfeOptions& opts = {}) {
  if (jac.rows() != cone.dim()) throw DimensionError("Jacobian rows do not match cone dimension");
  switch (strategy) {
  case DirectionStrategy::Steepest:
    return solve_min_norm(cone.transform() * jac, opts);

  case DirectionStrategy::BarzilaiBorwein:
  case DirectionStrategy::FixedScale: {
    if (!row_scale) {
      throw ConfigError(std::string(to_string(strategy)) + " direction requires a row scale vector");
    }
    if (row_scale->size() != cone.rows()) throw DimensionError("row scale size mismatch");
    if (!(row_scale->array() > 0.0).all()) throw ConfigError("row scales must be positive");
    const Vector inv = row_scale->cwiseInverse();
    const Matrix scaled = inv.asDiagonal() * cone.transform();
    return solve_min_norm(scaled * jac, opts);
  }

  case DirectionStrategy::Equiangular: {
    const Matrix rows = cone.transform() * jac;
    std::vector<Index> kept;
    for (Index i = 0; i < rows.rows(); ++i)
      if (rows.row(i).norm() > kEquiangularDropNorm) kept.push_back(i);

    const Index l = rows.rows();
    if (kept.empty()) {
      DirectionResult r;
      r.d = Vector::Zero(jac.cols());
      r.lambda = Vector::Constant(l, 1.0 / static_cast<double>(l));
      return r;
    }
    Matrix unit(static_cast<Index>(kept.size()), jac.cols());
    for (std::size_t k = 0; k < kept.size(); ++k) {
      unit.row(static_cast<Index>(k)) = rows.row(kept[k]) / rows.row(kept[k]).norm();
    }
    DirectionResult sub = solve_min_norm(unit, opts);
    Vector full = Vector::Zero(l);
    for (std::size_t k = 0; k < kept.size(); ++k) full(kept[k]) = sub.lambda(static_cast<Index>(k));
    sub.lambda = std::move(full);
    return sub;
  }
  }
  throw ConfigError("unknown direction strategy");
}

/// Direction at x for problem p under cone K.
inline DirectionResult direction(const Vector& x, const VectorProblem& p, const PolyhedralCone& cone,
                                 DirectionStrategy strategy,
                                 const std::optional<Vector>& row_scale = {},
                                 const FrankWolfeOptions& opts = {}) {
  return direction_from_jacobian(jacobian(p, x), cone, strategy, row_scale, opts);
}

/// ||d|| <= tol (inclusive).
inline bool is_stationary(const DirectionResult& res, double tol) { return res.dnorm <= tol; }

} // namespace vopt
