#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "vopt/error.hpp"
#include "vopt/types.hpp"

namespace vopt {

/// Vector objective F : R^n -> R^m with an analytic Jacobian.
///
/// `lower`/`upper` only bound the sampling of start points; iterates are
/// unconstrained. `mu` and `ell` are optional strong-convexity and smoothness
/// certificates in objective space (available for the quadratic problems).
struct VectorProblem {
  std::string name;
  Index n = 0;
  Index m = 0;
  std::function<Vector(const Vector&)> eval;
  std::function<Matrix(const Vector&)> jac;
  Vector lower;
  Vector upper;
  std::optional<OrderVector> mu;
  std::optional<OrderVector> ell;

  void validate() const {
    if (n <= 0 || m <= 0) throw ConfigError(name + ": dimensions must be positive");
    if (!eval || !jac) throw ConfigError(name + ": objective and Jacobian are required");
    if (lower.size() != n || upper.size() != n) throw DimensionError(name + ": bound size mismatch");
    if (!(lower.array() < upper.array()).all()) throw ConfigError(name + ": lower must be < upper");
    if (mu && mu->size() != m) throw DimensionError(name + ": mu size mismatch");
    if (ell && ell->size() != m) throw DimensionError(name + ": ell size mismatch");
  }
};

/// Start point x0 and the auxiliary point x_prev used to seed the first BB step.
struct StartPair {
  Vector x0;
  Vector x_prev;
};

namespace detail {

inline std::string format_point(const Vector& x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << ')';
  return os.str();
}

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementation.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace detail

/// F(x). Throws NumericError (carrying x) when the value is not finite.
inline Vector evaluate(const VectorProblem& p, const Vector& x) {
  if (x.size() != p.n) throw DimensionError(p.name + ": point has wrong dimension");
  if (!x.allFinite()) throw NumericError(p.name + ": non-finite point " + detail::format_point(x));
  Vector f = p.eval(x);
  if (f.size() != p.m) throw DimensionError(p.name + ": objective returned wrong size");
  if (!f.allFinite()) {
    throw NumericError(p.name + ": non-finite objective at " + detail::format_point(x));
  }
  return f;
}

/// F(x), incrementing the caller-owned evaluation counter.
inline Vector evaluate(const VectorProblem& p, const Vector& x, std::size_t& fevals) {
  ++fevals;
  return evaluate(p, x);
}

inline Matrix jacobian(const VectorProblem& p, const Vector& x) {
  if (x.size() != p.n) throw DimensionError(p.name + ": point has wrong dimension");
  Matrix j = p.jac(x);
  if (j.rows() != p.m || j.cols() != p.n) throw DimensionError(p.name + ": Jacobian has wrong shape");
  if (!j.allFinite()) {
    throw NumericError(p.name + ": non-finite Jacobian at " + detail::format_point(x));
  }
  return j;
}

/// Central-difference Jacobian with step h.
inline Matrix central_difference_jacobian(const VectorProblem& p, const Vector& x, double h) {
  Matrix j(p.m, p.n);
  Vector xp = x;
  Vector xm = x;
  for (Index k = 0; k < p.n; ++k) {
    xp(k) = x(k) + h;
    xm(k) = x(k) - h;
    j.col(k) = (p.eval(xp) - p.eval(xm)) / (2.0 * h);
    xp(k) = x(k);
    xm(k) = x(k);
  }
  return j;
}

/// Max over `samples` uniform box points and all entries of
/// |analytic - central difference| / max(1, |analytic|).
inline double fd_check(const VectorProblem& p, int samples, double h, std::uint64_t seed = 20240601) {
  if (!(h > 0.0)) throw ConfigError("fd_check step must be positive");
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vector x(p.n);
    for (Index k = 0; k < p.n; ++k) {
      x(k) = p.lower(k) + (p.upper(k) - p.lower(k)) * detail::unit_uniform(rng);
    }
    const Matrix analytic = jacobian(p, x);
    const Matrix numeric = central_difference_jacobian(p, x, h);
    const Matrix rel =
        (analytic - numeric).cwiseAbs().cwiseQuotient(analytic.cwiseAbs().cwiseMax(1.0));
    worst = std::max(worst, rel.maxCoeff());
  }
  return worst;
}

/// Relative half-width of the neighbourhood x_prev is drawn from.
inline constexpr double kPrevPointRadius = 1e-4;

/// x0 ~ U[lower, upper] from mt19937_64(seed); x_prev = x0 + delta with
/// delta_k ~ U[-1e-4, 1e-4] * (upper_k - lower_k).
inline StartPair sample_start(const VectorProblem& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  StartPair sp{Vector(p.n), Vector(p.n)};
  for (Index k = 0; k < p.n; ++k) {
    sp.x0(k) = p.lower(k) + (p.upper(k) - p.lower(k)) * detail::unit_uniform(rng);
  }
  for (Index k = 0; k < p.n; ++k) {
    const double width = p.upper(k) - p.lower(k);
    sp.x_prev(k) = sp.x0(k) + kPrevPointRadius * width * (2.0 * detail::unit_uniform(rng) - 1.0);
  }
  return sp;
}

} // namespace vopt
