#pragma once

#include <Eigen/Core>

namespace sgdpa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct EigenvalueRange {
  double min = 0.0;
  double max = 0.0;
};

/// Smallest and largest eigenvalue of a symmetric matrix. Only the lower
/// triangle is read.
EigenvalueRange symmetric_eigenvalue_range(const Matrix& a);

/// True when |a - aᵀ|_max ≤ rel_tol · max(1, |a|_max).
bool is_symmetric(const Matrix& a, double rel_tol = 1e-12);

bool all_finite(const Vector& v);

}  // namespace sgdpa
