#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "vopt/error.hpp"
#include "vopt/problem.hpp"

namespace vopt::problems {

namespace detail {

inline Vector filled(Index n, double v) { return Vector::Constant(n, v); }

} // namespace detail

/// BK1: (x1^2 + x2^2, (x1-5)^2 + (x2-5)^2). Both Hessians are 2I.
inline VectorProblem bk1() {
  VectorProblem p;
  p.name = "BK1";
  p.n = 2;
  p.m = 2;
  p.eval = [](const Vector& x) {
    return Vector{{x.squaredNorm(), (x.array() - 5.0).square().sum()}};
  };
  p.jac = [](const Vector& x) {
    Matrix j(2, 2);
    j.row(0) = 2.0 * x.transpose();
    j.row(1) = 2.0 * (x.array() - 5.0).matrix().transpose();
    return j;
  };
  p.lower = detail::filled(2, -5.0);
  p.upper = detail::filled(2, 10.0);
  p.mu = Vector::Constant(2, 2.0);
  p.ell = Vector::Constant(2, 2.0);
  return p;
}

/// DD1 (n = 5): (sum x_i^2, 3x1 + 2x2 - x3/3 + 0.01 (x4 - x5)^3).
inline VectorProblem dd1() {
  VectorProblem p;
  p.name = "DD1";
  p.n = 5;
  p.m = 2;
  p.eval = [](const Vector& x) {
    const double c = x(3) - x(4);
    return Vector{{x.squaredNorm(), 3.0 * x(0) + 2.0 * x(1) - x(2) / 3.0 + 0.01 * c * c * c}};
  };
  p.jac = [](const Vector& x) {
    const double c = x(3) - x(4);
    Matrix j(2, 5);
    j.row(0) = 2.0 * x.transpose();
    j.row(1) << 3.0, 2.0, -1.0 / 3.0, 0.03 * c * c, -0.03 * c * c;
    return j;
  };
  p.lower = detail::filled(5, -20.0);
  p.upper = detail::filled(5, 20.0);
  return p;
}

/// Deb's bi-modal problem: (x1, g(x2)/x1) with
/// g(y) = 2 - exp(-((y-0.2)/0.004)^2) - 0.8 exp(-((y-0.6)/0.4)^2).
inline VectorProblem deb() {
  VectorProblem p;
  p.name = "Deb";
  p.n = 2;
  p.m = 2;
  struct G {
    double value;
    double slope;
  };
  auto g = [](double y) {
    const double u = (y - 0.2) / 0.004;
    const double v = (y - 0.6) / 0.4;
    const double e1 = std::exp(-u * u);
    const double e2 = std::exp(-v * v);
    return G{2.0 - e1 - 0.8 * e2, e1 * 2.0 * u / 0.004 + 0.8 * e2 * 2.0 * v / 0.4};
  };
  p.eval = [g](const Vector& x) { return Vector{{x(0), g(x(1)).value / x(0)}}; };
  p.jac = [g](const Vector& x) {
    const G gv = g(x(1));
    Matrix j(2, 2);
    j << 1.0, 0.0, -gv.value / (x(0) * x(0)), gv.slope / x(0);
    return j;
  };
  p.lower = detail::filled(2, 0.1);
  p.upper = detail::filled(2, 1.0);
  return p;
}

/// FF1 (Fonseca-Fleming, n = 2):
/// (1 - exp(-(x1-1)^2 - (x2+1)^2), 1 - exp(-(x1+1)^2 - (x2-1)^2)).
inline VectorProblem ff1() {
  VectorProblem p;
  p.name = "FF1";
  p.n = 2;
  p.m = 2;
  p.eval = [](const Vector& x) {
    const double e1 = std::exp(-(x(0) - 1) * (x(0) - 1) - (x(1) + 1) * (x(1) + 1));
    const double e2 = std::exp(-(x(0) + 1) * (x(0) + 1) - (x(1) - 1) * (x(1) - 1));
    return Vector{{1.0 - e1, 1.0 - e2}};
  };
  p.jac = [](const Vector& x) {
    const double e1 = std::exp(-(x(0) - 1) * (x(0) - 1) - (x(1) + 1) * (x(1) + 1));
    const double e2 = std::exp(-(x(0) + 1) * (x(0) + 1) - (x(1) - 1) * (x(1) - 1));
    Matrix j(2, 2);
    j << 2.0 * (x(0) - 1) * e1, 2.0 * (x(1) + 1) * e1, 2.0 * (x(0) + 1) * e2, 2.0 * (x(1) - 1) * e2;
    return j;
  };
  p.lower = detail::filled(2, -1.0);
  p.upper = detail::filled(2, 1.0);
  return p;
}

/// Hil1 (Hillermeier): (cos(a) b, sin(a) b) with
/// a = (2 pi / 360)(45 + 40 sin(2 pi x1) + 25 sin(2 pi x2)), b = 1 + 0.5 cos(2 pi x1).
inline VectorProblem hil1() {
  VectorProblem p;
  p.name = "Hil1";
  p.n = 2;
  p.m = 2;
  constexpr double tau = 2.0 * std::numbers::pi;
  constexpr double deg = tau / 360.0;
  p.eval = [](const Vector& x) {
    const double a = deg * (45.0 + 40.0 * std::sin(tau * x(0)) + 25.0 * std::sin(tau * x(1)));
    const double b = 1.0 + 0.5 * std::cos(tau * x(0));
    return Vector{{std::cos(a) * b, std::sin(a) * b}};
  };
  p.jac = [](const Vector& x) {
    const double a = deg * (45.0 + 40.0 * std::sin(tau * x(0)) + 25.0 * std::sin(tau * x(1)));
    const double b = 1.0 + 0.5 * std::cos(tau * x(0));
    const double da1 = deg * 40.0 * tau * std::cos(tau * x(0));
    const double da2 = deg * 25.0 * tau * std::cos(tau * x(1));
    const double db1 = -0.5 * tau * std::sin(tau * x(0));
    const double ca = std::cos(a);
    const double sa = std::sin(a);
    Matrix j(2, 2);
    j << -sa * da1 * b + ca * db1, -sa * da2 * b, ca * da1 * b + sa * db1, ca * da2 * b;
    return j;
  };
  p.lower = detail::filled(2, 0.0);
  p.upper = detail::filled(2, 1.0);
  return p;
}

// Coefficients of Imbalance1: two axis-aligned quadratics that are nearly flat
// along x1 and steep along x2, with minimizers (0, 0) and (1, 1). The second
// objective is an order of magnitude steeper than the first.
inline constexpr double kImbalanceF1[2] = {0.039, 94.3};
inline constexpr double kImbalanceF2[2] = {0.259, 616.0};

/// Imbalance1: (0.5 (h11 x1^2 + h12 x2^2), 0.5 (h21 (x1-1)^2 + h22 (x2-1)^2)).
inline VectorProblem imbalance1() {
  VectorProblem p;
  p.name = "Imbalance1";
  p.n = 2;
  p.m = 2;
  p.eval = [](const Vector& x) {
    const double f1 = 0.5 * (kImbalanceF1[0] * x(0) * x(0) + kImbalanceF1[1] * x(1) * x(1));
    const double f2 = 0.5 * (kImbalanceF2[0] * (x(0) - 1) * (x(0) - 1) +
                             kImbalanceF2[1] * (x(1) - 1) * (x(1) - 1));
    return Vector{{f1, f2}};
  };
  p.jac = [](const Vector& x) {
    Matrix j(2, 2);
    j << kImbalanceF1[0] * x(0), kImbalanceF1[1] * x(1), kImbalanceF2[0] * (x(0) - 1),
        kImbalanceF2[1] * (x(1) - 1);
    return j;
  };
  p.lower = detail::filled(2, -2.0);
  p.upper = detail::filled(2, 2.0);
  return p;
}

/// JOS1 with n = 50: ((1/n) sum x_i^2, (1/n) sum (x_i - 2)^2). Hessians (2/n) I.
inline VectorProblem jos1a(Index n = 50) {
  VectorProblem p;
  p.name = "JOS1a";
  p.n = n;
  p.m = 2;
  const double inv = 1.0 / static_cast<double>(n);
  p.eval = [inv](const Vector& x) {
    return Vector{{inv * x.squaredNorm(), inv * (x.array() - 2.0).square().sum()}};
  };
  p.jac = [inv, n](const Vector& x) {
    Matrix j(2, n);
    j.row(0) = 2.0 * inv * x.transpose();
    j.row(1) = 2.0 * inv * (x.array() - 2.0).matrix().transpose();
    return j;
  };
  p.lower = detail::filled(n, -2.0);
  p.upper = detail::filled(n, 2.0);
  p.mu = Vector::Constant(2, 2.0 * inv);
  p.ell = Vector::Constant(2, 2.0 * inv);
  return p;
}

/// LE1: ((x1^2 + x2^2)^(1/8), ((x1-0.5)^2 + (x2-0.5)^2)^(1/4)).
/// Not differentiable at the two centres; start points avoid them almost surely.
inline VectorProblem le1() {
  VectorProblem p;
  p.name = "LE1";
  p.n = 2;
  p.m = 2;
  p.eval = [](const Vector& x) {
    const double r = x.squaredNorm();
    const double q = (x.array() - 0.5).square().sum();
    return Vector{{std::pow(r, 0.125), std::pow(q, 0.25)}};
  };
  p.jac = [](const Vector& x) {
    const double r = x.squaredNorm();
    const double q = (x.array() - 0.5).square().sum();
    Matrix j(2, 2);
    j.row(0) = 0.25 * std::pow(r, -0.875) * x.transpose();
    j.row(1) = 0.5 * std::pow(q, -0.75) * (x.array() - 0.5).matrix().transpose();
    return j;
  };
  p.lower = detail::filled(2, -5.0);
  p.upper = detail::filled(2, 10.0);
  return p;
}

/// PNR: (x1^4 + x2^4 - x1^2 + x2^2 - 10 x1 x2 + 0.25 x1 + 20, (x1-1)^2 + x2^2).
inline VectorProblem pnr() {
  VectorProblem p;
  p.name = "PNR";
  p.n = 2;
  p.m = 2;
  p.eval = [](const Vector& x) {
    const double a = x(0);
    const double b = x(1);
    return Vector{{a * a * a * a + b * b * b * b - a * a + b * b - 10.0 * a * b + 0.25 * a + 20.0,
                   (a - 1) * (a - 1) + b * b}};
  };
  p.jac = [](const Vector& x) {
    const double a = x(0);
    const double b = x(1);
    Matrix j(2, 2);
    j << 4.0 * a * a * a - 2.0 * a - 10.0 * b + 0.25, 4.0 * b * b * b + 2.0 * b - 10.0 * a,
        2.0 * (a - 1), 2.0 * b;
    return j;
  };
  p.lower = detail::filled(2, -2.0);
  p.upper = detail::filled(2, 2.0);
  return p;
}

/// WIT1 (lambda = 0.01):
/// (lambda((x1-2)^2 + (x2-1)^2) + (1-lambda)((x1-2)^4 + (x2-1)^8), (x1+2)^2 + (x2+1)^2).
inline VectorProblem wit1() {
  constexpr double lambda = 0.01;
  VectorProblem p;
  p.name = "WIT1";
  p.n = 2;
  p.m = 2;
  p.eval = [](const Vector& x) {
    const double u = x(0) - 2.0;
    const double v = x(1) - 1.0;
    const double f1 = lambda * (u * u + v * v) + (1.0 - lambda) * (std::pow(u, 4) + std::pow(v, 8));
    const double f2 = (x(0) + 2.0) * (x(0) + 2.0) + (x(1) + 1.0) * (x(1) + 1.0);
    return Vector{{f1, f2}};
  };
  p.jac = [](const Vector& x) {
    const double u = x(0) - 2.0;
    const double v = x(1) - 1.0;
    Matrix j(2, 2);
    j << 2.0 * lambda * u + 4.0 * (1.0 - lambda) * u * u * u,
        2.0 * lambda * v + 8.0 * (1.0 - lambda) * std::pow(v, 7), 2.0 * (x(0) + 2.0),
        2.0 * (x(1) + 1.0);
    return j;
  };
  p.lower = detail::filled(2, -2.0);
  p.upper = detail::filled(2, 2.0);
  return p;
}

/// Two quadratics 0.5 (x - c_i)^T diag(h_i) (x - c_i) with certificates
/// mu_i = min(h_i), ell_i = max(h_i) (valid for the nonnegative orthant).
inline VectorProblem diagonal_quadratic_pair(std::string name, const Vector& h1, const Vector& c1,
                                             const Vector& h2, const Vector& c2, double box = 10.0) {
  if (h1.size() != c1.size() || h2.size() != c2.size() || h1.size() != h2.size()) {
    throw DimensionError("quadratic pair: inconsistent sizes");
  }
  if ((h1.array() <= 0).any() || (h2.array() <= 0).any()) {
    throw ConfigError("quadratic pair: curvatures must be positive");
  }
  VectorProblem p;
  p.name = std::move(name);
  p.n = h1.size();
  p.m = 2;
  p.eval = [=](const Vector& x) {
    const Vector u = x - c1;
    const Vector v = x - c2;
    return Vector{{0.5 * u.dot(h1.cwiseProduct(u)), 0.5 * v.dot(h2.cwiseProduct(v))}};
  };
  p.jac = [=](const Vector& x) {
    Matrix j(2, x.size());
    j.row(0) = h1.cwiseProduct(x - c1).transpose();
    j.row(1) = h2.cwiseProduct(x - c2).transpose();
    return j;
  };
  p.lower = Vector::Constant(p.n, -box);
  p.upper = Vector::Constant(p.n, box);
  p.mu = Vector{{h1.minCoeff(), h2.minCoeff()}};
  p.ell = Vector{{h1.maxCoeff(), h2.maxCoeff()}};
  return p;
}

/// Names of the ten benchmark problems, in table order.
inline const std::vector<std::string>& names() {
  static const std::vector<std::string> list = {"BK1",        "DD1",   "Deb", "FF1", "Hil1",
                                                "Imbalance1", "JOS1a", "LE1", "PNR", "WIT1"};
  return list;
}

inline VectorProblem by_name(const std::string& name) {
  VectorProblem p;
  if (name == "BK1") p = bk1();
  else if (name == "DD1") p = dd1();
  else if (name == "Deb") p = deb();
  else if (name == "FF1") p = ff1();
  else if (name == "Hil1") p = hil1();
  else if (name == "Imbalance1") p = imbalance1();
  else if (name == "JOS1a") p = jos1a();
  else if (name == "LE1") p = le1();
  else if (name == "PNR") p = pnr();
  else if (name == "WIT1") p = wit1();
  else throw ConfigError("unknown problem '" + name + "'");
  p.validate();
  return p;
}

} // namespace vopt::problems
