#pragma once

#include <cstddef>
#include <limits>

#include "sgdpa/linalg.hpp"
#include "sgdpa/problem.hpp"

namespace sgdpa {

/// Penalty ρ > 0 and perturbation τ ∈ [0, 1) of the perturbed augmented
/// Lagrangian. τ = 0 recovers the classical augmented Lagrangian.
struct PalParams {
  double rho = 10.0;
  double tau = 1e-2;

  /// Throws ValidationError when ρ ≤ 0 or τ ∉ [0, 1).
  void validate() const;
};

/// Nonnegative multiplier vector λ ∈ R^m_+.
class DualVector {
 public:
  DualVector() = default;
  /// Zero multipliers of length m.
  explicit DualVector(std::size_t m);
  /// Throws ContractError if any entry is negative or not finite.
  explicit DualVector(Vector values);

  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t j) const { return values_(static_cast<Eigen::Index>(j)); }
  const Vector& values() const noexcept { return values_; }

  /// Sets coordinate j; the value must be nonnegative and finite.
  void set(std::size_t j, double value);

  double l1_norm() const { return values_.sum(); }
  double norm() const { return values_.norm(); }
  double max() const { return values_.size() == 0 ? 0.0 : values_.maxCoeff(); }
  double min() const { return values_.size() == 0 ? 0.0 : values_.minCoeff(); }

  friend bool operator==(const DualVector& a, const DualVector& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  Vector values_;
};

/// ψ(h, λ) = (1/2ρ)·[ (ρh + (1−τ)λ)₊² − ((1−τ)λ)² ].
double psi(const PalParams& params, double h, double lam);

/// (ρh + (1−τ)λ)₊, the factor multiplying ∇h_j in ∇ₓψ.
double psi_grad_x_scalar(const PalParams& params, double h, double lam);

/// ∂ψ/∂λ = (1−τ)·max(−(1−τ)λ/ρ, h).
double psi_grad_lambda(const PalParams& params, double h, double lam);

/// L(x; λ) = F(x) + (1/m) Σ_j ψ(h_j(x), λ_j).
double lagrangian_value(const ConstrainedProblem& problem, const PalParams& params,
                        const Vector& x, const DualVector& lambda);

/// ∇ₓL(x; λ) = ∇F(x) + (1/m) Σ_j (ρh_j(x) + (1−τ)λ_j)₊ ∇h_j(x).
Vector lagrangian_grad_x(const ConstrainedProblem& problem, const PalParams& params,
                         const Vector& x, const DualVector& lambda);

/// Lipschitz constant of ∇ₓL for fixed λ:
///   L_f + ρB_h² + (ρM_h + ((1−τ)/m)‖λ‖₁)·L_h.
double smoothness_constant(const ProblemConstants& constants, const PalParams& params,
                           double lambda_l1, std::size_t m);

/// 2B_F² + 8(ρ²M_h² + (1−τ)²‖λ‖²)·B_h².
double variance_constant(const ProblemConstants& constants, const PalParams& params,
                         double lambda_norm_sq);

/// Bound on every multiplier produced from λ₀ = 0 when τ > 0.
struct DualBound {
  double value = std::numeric_limits<double>::infinity();
  /// False when τ = 0: the bound does not apply and value is +∞.
  bool active = false;
};

/// ρ·M_h/τ, or an inactive +∞ bound when τ = 0.
DualBound dual_bound(const ProblemConstants& constants, const PalParams& params);

struct PalConstants {
  double L_smooth = 0.0;
  double B_sq = 0.0;
  DualBound dual_bound;
};

/// Constants of the Lagrangian at the given multipliers.
PalConstants pal_constants(const ProblemConstants& constants, const PalParams& params,
                           const DualVector& lambda);

}  // namespace sgdpa
