#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vopt/cone.hpp"
#include "vopt/error.hpp"
#include "vopt/problem.hpp"
#include "vopt/types.hpp"

namespace vopt {

/// How an entry of the BB vector was obtained.
enum class Curvature {
  Positive,    ///< <s, y_i> > 0: Rayleigh quotient <s, y_i> / ||s||^2
  Negative,    ///< <s, y_i> < 0: ||y_i|| / ||s||
  Zero,        ///< <s, y_i> = 0: alpha_min
  ClampedLow,  ///< raw value below alpha_min
  ClampedHigh, ///< raw value above alpha_max
};

inline const char* to_string(Curvature c) {
  switch (c) {
  case Curvature::Positive: return "positive-curvature";
  case Curvature::Negative: return "negative-curvature";
  case Curvature::Zero: return "zero-curvature";
  case Curvature::ClampedLow: return "clamped-lo";
  case Curvature::ClampedHigh: return "clamped-hi";
  }
  return "?";
}

struct AlphaBounds {
  double min = 1e-3;
  double max = 1e6;
};

/// Per-row BB scalars with provenance.
struct AlphaVector {
  Vector alpha;
  std::vector<Curvature> provenance;

  /// True if some entry sits on alpha_min or alpha_max (clamped or zero curvature).
  bool at_bound() const {
    return std::any_of(provenance.begin(), provenance.end(), [](Curvature c) {
      return c == Curvature::Zero || c == Curvature::ClampedLow || c == Curvature::ClampedHigh;
    });
  }
};

/// Clamped BB scalars. Row i of `y` is row i of A (JF(x_k) - JF(x_{k-1})), s = x_k - x_{k-1}.
inline AlphaVector bb_alpha(const Vector& s, const Matrix& y, double alpha_min, double alpha_max) {
  if (y.cols() != s.size()) throw DimensionError("bb_alpha: step and Jacobian difference disagree");
  if (!(alpha_min > 0.0) || !(alpha_min < alpha_max)) {
    throw ConfigError("bb_alpha: need 0 < alpha_min < alpha_max");
  }
  const double snorm2 = s.squaredNorm();
  if (!(snorm2 > 0.0)) throw ConfigError("bb_alpha: zero step (repeated point)");

  AlphaVector out;
  out.alpha.resize(y.rows());
  out.provenance.resize(static_cast<std::size_t>(y.rows()));
  for (Index i = 0; i < y.rows(); ++i) {
    const double sy = s.dot(y.row(i));
    double raw = 0.0;
    Curvature tag = Curvature::Zero;
    if (sy > 0.0) {
      raw = sy / snorm2;
      tag = Curvature::Positive;
    } else if (sy < 0.0) {
      raw = y.row(i).norm() / std::sqrt(snorm2);
      tag = Curvature::Negative;
    } else {
      raw = alpha_min;
    }
    if (tag != Curvature::Zero) {
      if (raw < alpha_min) {
        raw = alpha_min;
        tag = Curvature::ClampedLow;
      } else if (raw > alpha_max) {
        raw = alpha_max;
        tag = Curvature::ClampedHigh;
      }
    }
    out.alpha(i) = raw;
    out.provenance[static_cast<std::size_t>(i)] = tag;
  }
  return out;
}

inline AlphaVector bb_alpha(const Vector& s, const Matrix& y, const AlphaBounds& bounds = {}) {
  return bb_alpha(s, y, bounds.min, bounds.max);
}

/// Unclamped objective-space BB vector: e_i = <row i of dJ, s> / ||s||^2.
inline OrderVector bb_vector_raw(const Vector& s, const Matrix& jac_diff) {
  if (jac_diff.cols() != s.size()) throw DimensionError("bb_vector_raw: size mismatch");
  const double snorm2 = s.squaredNorm();
  if (!(snorm2 > 0.0)) throw ConfigError("bb_vector_raw: zero step (repeated point)");
  return (jac_diff * s) / snorm2;
}

enum class LineSearchKind { Armijo, Majorization };

inline const char* to_string(LineSearchKind k) {
  return k == LineSearchKind::Armijo ? "armijo" : "mm";
}

struct LineSearchParams {
  double sigma = 1e-4;
  double gamma = 0.5;
  int jmax = 50;
};

struct LineSearchResult {
  double t = 1.0;
  int trials = 0; ///< objective evaluations; t = gamma^(trials - 1)
  LineSearchKind accepted_condition = LineSearchKind::Armijo;
  Vector f_new;   ///< F(x + t d)
};

namespace detail {

inline void check_line_search(const PolyhedralCone& cone, const Vector& x, const Vector& d,
                              const Vector& row_products, const LineSearchParams& params) {
  if (x.size() != d.size()) throw DimensionError("line search: point and direction disagree");
  if (row_products.size() != cone.rows()) throw DimensionError("line search: row products size");
  if (!(params.gamma > 0.0 && params.gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (params.jmax < 0) throw ConfigError("jmax must be nonnegative");
}

// Largest t = gamma^j, j = 0..jmax, with A (F(x + t d) - F(x)) <= t * rhs.
template <class Rhs>
LineSearchResult backtrack(const VectorProblem& p, const PolyhedralCone& cone, const Vector& x,
                           const Vector& fx, const Vector& d, const LineSearchParams& params,
                           LineSearchKind kind, Rhs&& rhs) {
  LineSearchResult res;
  res.accepted_condition = kind;
  double t = 1.0;
  for (int j = 0; j <= params.jmax; ++j) {
    Vector trial = evaluate(p, x + t * d);
    res.trials = j + 1;
    const Vector lhs = cone.transform() * (trial - fx);
    if ((lhs.array() <= (t * rhs).array()).all()) {
      res.t = t;
      res.f_new = std::move(trial);
      return res;
    }
    t *= params.gamma;
  }
  throw LineSearchError("line search failed after " + std::to_string(params.jmax + 1) +
                            " trials (" + to_string(kind) + ", last t = " + std::to_string(t) + ")",
                        params.jmax + 1, t / params.gamma);
}

} // namespace detail

/// Backtracking on A (F(x + t d) - F(x)) <= sigma t (A JF(x) d), componentwise.
/// `row_products` holds <A_i JF(x), d>; `fx` is F(x).
inline LineSearchResult armijo_search(const VectorProblem& p, const PolyhedralCone& cone,
                                      const Vector& x, const Vector& fx, const Vector& d,
                                      const Vector& row_products,
                                      const LineSearchParams& params = {}) {
  detail::check_line_search(cone, x, d, row_products, params);
  if (!(params.sigma > 0.0 && params.sigma < 1.0)) throw ConfigError("sigma must lie in (0, 1)");
  const Vector rhs = params.sigma * row_products;
  return detail::backtrack(p, cone, x, fx, d, params, LineSearchKind::Armijo, rhs);
}

/// Backtracking on the majorization condition
/// A (F(x + t d) - F(x)) <= t (A JF(x) d + 0.5 ||d||^2 alpha), componentwise.
/// `alpha` is the BB vector, or all ones for the steepest-descent variant.
inline LineSearchResult mm_search(const VectorProblem& p, const PolyhedralCone& cone,
                                  const Vector& x, const Vector& fx, const Vector& d,
                                  const Vector& row_products, const Vector& alpha,
                                  const LineSearchParams& params = {}) {
  detail::check_line_search(cone, x, d, row_products, params);
  if (alpha.size() != cone.rows()) throw DimensionError("mm_search: alpha size mismatch");
  const Vector rhs = row_products + 0.5 * d.squaredNorm() * alpha;
  return detail::backtrack(p, cone, x, fx, d, params, LineSearchKind::Majorization, rhs);
}

} // namespace vopt
