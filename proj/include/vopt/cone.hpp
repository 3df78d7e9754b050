#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "vopt/error.hpp"
#include "vopt/problem.hpp"
#include "vopt/types.hpp"

namespace vopt {

/// Ordering cone K = {y : A y >= 0} given by its transform matrix A (l x m).
///
/// The induced order is a <=_K b  <=>  A a <= A b componentwise. Rows A_i span
/// the base conv{A_i} of the dual cone, which is what the direction
/// subproblems and the condition number work with. Generators (a V-description)
/// are optional and only used to cross-check the H-description.
class PolyhedralCone {
public:
  explicit PolyhedralCone(Matrix transform, std::string name = {},
                          std::vector<Vector> generators = {})
      : transform_(std::move(transform)), name_(std::move(name)),
        generators_(std::move(generators)) {
    validate();
  }

  /// R^m_+ with A = I_m.
  static PolyhedralCone nonnegative_orthant(Index m) {
    std::vector<Vector> gens;
    for (Index j = 0; j < m; ++j) gens.push_back(Vector::Unit(m, j));
    return PolyhedralCone(Matrix::Identity(m, m), m == 2 ? "R2+" : "R+", std::move(gens));
  }

  /// K1 = {5y1 - y2 >= 0, -y1 + 5y2 >= 0}, a cone inside R^2_+.
  static PolyhedralCone k1() {
    Matrix a(2, 2);
    a << 5, -1, -1, 5;
    return PolyhedralCone(a, "K1", {Vector{{1.0, 5.0}}, Vector{{5.0, 1.0}}});
  }

  /// K2 = {5y1 + y2 >= 0, y1 + 5y2 >= 0}, a cone containing R^2_+.
  static PolyhedralCone k2() {
    Matrix a(2, 2);
    a << 5, 1, 1, 5;
    return PolyhedralCone(a, "K2", {Vector{{-1.0, 5.0}}, Vector{{5.0, -1.0}}});
  }

  /// Looks up "R2+", "K1" or "K2".
  static PolyhedralCone by_name(const std::string& name) {
    if (name == "R2+" || name == "R2" || name == "orthant") return nonnegative_orthant(2);
    if (name == "K1") return k1();
    if (name == "K2") return k2();
    throw ConfigError("unknown cone '" + name + "' (expected R2+, K1, K2 or explicit rows)");
  }

  const Matrix& transform() const noexcept { return transform_; }
  const std::string& name() const noexcept { return name_; }
  const std::vector<Vector>& generators() const noexcept { return generators_; }

  Index rows() const noexcept { return transform_.rows(); }
  Index dim() const noexcept { return transform_.cols(); }

  Vector apply(const OrderVector& y) const {
    if (y.size() != dim()) {
      throw DimensionError("cone of dimension " + std::to_string(dim()) +
                           " applied to vector of size " + std::to_string(y.size()));
    }
    return transform_ * y;
  }

  bool contains(const OrderVector& y) const { return (apply(y).array() >= 0.0).all(); }

  bool interior_contains(const OrderVector& y) const { return (apply(y).array() > 0.0).all(); }

  /// Same cone with each row multiplied by a positive factor.
  PolyhedralCone row_scaled(const Vector& factors, std::string name = {}) const {
    if (factors.size() != rows()) throw DimensionError("row scale size mismatch");
    if ((factors.array() <= 0.0).any()) throw ConfigError("row scale factors must be positive");
    return PolyhedralCone(factors.asDiagonal() * transform_, name.empty() ? name_ : std::move(name),
                          generators_);
  }

  /// Same cone with rows reordered: row i of the result is row perm[i] of this.
  PolyhedralCone row_permuted(const std::vector<Index>& perm, std::string name = {}) const {
    if (static_cast<Index>(perm.size()) != rows()) throw DimensionError("permutation size mismatch");
    Matrix a(rows(), dim());
    for (Index i = 0; i < rows(); ++i) a.row(i) = transform_.row(perm[static_cast<std::size_t>(i)]);
    return PolyhedralCone(std::move(a), name.empty() ? name_ : std::move(name), generators_);
  }

  /// Checks that every sampled y satisfies (A y >= 0) <=> (y in cone(generators)).
  /// Membership in cone(generators) is decided with nonnegative least squares.
  /// Samples within 1e-9 of the boundary are skipped. Returns the number of
  /// disagreements (0 for a consistent description).
  int cross_check_generators(int samples, std::uint64_t seed) const;

private:
  void validate() const {
    if (transform_.rows() == 0 || transform_.cols() == 0) {
      throw ConfigError("transform matrix must be non-empty");
    }
    if (!transform_.allFinite()) throw ConfigError("transform matrix has non-finite entries");
    for (Index i = 0; i < transform_.rows(); ++i) {
      if (transform_.row(i).norm() == 0.0) {
        throw ConfigError("transform row " + std::to_string(i) + " is zero");
      }
    }
    if (transform_.rows() < transform_.cols()) {
      throw ConfigError("transform matrix needs at least as many rows as columns");
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(transform_);
    if (qr.rank() < transform_.cols()) {
      throw ConfigError("transform matrix must have full column rank");
    }
    for (const auto& g : generators_) {
      if (g.size() != transform_.cols()) throw DimensionError("generator dimension mismatch");
      if (((transform_ * g).array() < -1e-12).any()) {
        throw ConfigError("generator lies outside {y : A y >= 0}");
      }
    }
  }

  Matrix transform_;
  std::string name_;
  std::vector<Vector> generators_;
};

namespace detail {

// Lawson-Hanson active-set NNLS: min ||G c - y|| subject to c >= 0.
inline Vector nnls(const Matrix& g, const Vector& y, int max_iter = 200) {
  const Index k = g.cols();
  Vector c = Vector::Zero(k);
  std::vector<bool> passive(static_cast<std::size_t>(k), false);
  constexpr double tol = 1e-12;

  for (int outer = 0; outer < max_iter; ++outer) {
    Vector w = g.transpose() * (y - g * c);
    Index best = -1;
    double best_w = tol;
    for (Index j = 0; j < k; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    for (int inner = 0; inner < max_iter; ++inner) {
      std::vector<Index> idx;
      for (Index j = 0; j < k; ++j)
        if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
      Matrix gp(g.rows(), static_cast<Index>(idx.size()));
      for (std::size_t j = 0; j < idx.size(); ++j) gp.col(static_cast<Index>(j)) = g.col(idx[j]);
      Vector z = gp.colPivHouseholderQr().solve(y);

      bool feasible = (z.array() > tol).all();
      if (feasible) {
        c.setZero();
        for (std::size_t j = 0; j < idx.size(); ++j) c(idx[j]) = z(static_cast<Index>(j));
        break;
      }
      double alpha = 1.0;
      for (std::size_t j = 0; j < idx.size(); ++j) {
        const double zj = z(static_cast<Index>(j));
        if (zj <= tol) alpha = std::min(alpha, c(idx[j]) / (c(idx[j]) - zj));
      }
      for (std::size_t j = 0; j < idx.size(); ++j) {
        c(idx[j]) += alpha * (z(static_cast<Index>(j)) - c(idx[j]));
        if (c(idx[j]) <= tol) {
          c(idx[j]) = 0.0;
          passive[static_cast<std::size_t>(idx[j])] = false;
        }
      }
    }
  }
  return c;
}

} // namespace detail

inline int PolyhedralCone::cross_check_generators(int samples, std::uint64_t seed) const {
  if (generators_.empty()) return 0;
  Matrix g(dim(), static_cast<Index>(generators_.size()));
  for (std::size_t j = 0; j < generators_.size(); ++j) g.col(static_cast<Index>(j)) = generators_[j];

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  int disagreements = 0;
  for (int s = 0; s < samples; ++s) {
    Vector y(dim());
    for (Index j = 0; j < dim(); ++j) y(j) = normal(rng);
    const Vector ay = transform_ * y;
    if ((ay.array().abs() < 1e-9 * y.norm()).any()) continue;
    const bool h_member = (ay.array() >= 0.0).all();
    const Vector c = detail::nnls(g, y);
    const bool v_member = (g * c - y).norm() <= 1e-9 * y.norm();
    if (h_member != v_member) ++disagreements;
  }
  return disagreements;
}

inline void check_order_operands(const OrderVector& a, const OrderVector& b, const PolyhedralCone& cone) {
  if (a.size() != cone.dim() || b.size() != cone.dim()) {
    throw DimensionError("order comparison expects vectors of size " + std::to_string(cone.dim()) +
                         ", got " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
}

/// a <=_K b, i.e. A (b - a) >= 0 with no tolerance.
inline bool cone_leq(const OrderVector& a, const OrderVector& b, const PolyhedralCone& cone) {
  check_order_operands(a, b, cone);
  return ((cone.transform() * (b - a)).array() >= 0.0).all();
}

/// a <_K b, i.e. b - a in int(K): A (b - a) > 0 in every row.
inline bool cone_strict_lt(const OrderVector& a, const OrderVector& b, const PolyhedralCone& cone) {
  check_order_operands(a, b, cone);
  return ((cone.transform() * (b - a)).array() > 0.0).all();
}

/// Rows A_i in order; their convex hull is the dual-cone base used by the solvers.
inline std::vector<Vector> dual_base_vertices(const PolyhedralCone& cone) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(cone.rows()));
  for (Index i = 0; i < cone.rows(); ++i) out.emplace_back(cone.transform().row(i).transpose());
  return out;
}

/// Row-per-objective scaling at the start point: row i of A is divided by
/// max{1, ||grad F_i(x0)||_inf}. Requires a square transform (l = m).
inline PolyhedralCone scaled_transform(const PolyhedralCone& cone, const VectorProblem& problem,
                                       const Vector& x0) {
  if (cone.rows() != cone.dim()) {
    throw ConfigError("scaled transform is defined for square transform matrices only");
  }
  if (cone.dim() != problem.m) throw DimensionError("cone and problem objective dimension differ");
  const Matrix jac = jacobian(problem, x0);
  Vector factors(cone.rows());
  for (Index i = 0; i < cone.rows(); ++i) {
    factors(i) = 1.0 / std::max(1.0, jac.row(i).cwiseAbs().maxCoeff());
  }
  std::string label = cone.name().empty() ? std::string("scaled") : cone.name() + "-hat";
  return cone.row_scaled(factors, std::move(label));
}

} // namespace vopt
