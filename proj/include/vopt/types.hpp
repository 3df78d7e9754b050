#pragma once

#include <Eigen/Dense>

namespace vopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// A point in objective space ordered by a cone (F values, mu, ell, e_k).
using OrderVector = Vector;

inline bool all_finite(const Vector& v) { return v.allFinite(); }
inline bool all_finite(const Matrix& m) { return m.allFinite(); }

} // namespace vopt
