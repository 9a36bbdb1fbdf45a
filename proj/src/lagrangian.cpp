#include "sgdpa/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "sgdpa/errors.hpp"

namespace sgdpa {
namespace {

void require_nonnegative(double lam) {
  if (!(lam >= 0.0)) throw ContractError("multiplier must be nonnegative, got " + std::to_string(lam));
}

void require_matching(const ConstrainedProblem& problem, const DualVector& lambda) {
  if (lambda.size() != problem.num_constraints()) {
    throw DimensionError("dual vector has " + std::to_string(lambda.size()) + " entries, expected " +
                         std::to_string(problem.num_constraints()));
  }
}

}  // namespace

void PalParams::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ValidationError("rho must be positive");
  if (!(tau >= 0.0 && tau < 1.0)) throw ValidationError("tau must lie in [0, 1)");
}

DualVector::DualVector(std::size_t m) : values_(Vector::Zero(static_cast<Eigen::Index>(m))) {}

DualVector::DualVector(Vector values) : values_(std::move(values)) {
  for (Eigen::Index j = 0; j < values_.size(); ++j) {
    if (!(values_(j) >= 0.0) || !std::isfinite(values_(j))) {
      throw ContractError("dual vector entries must be finite and nonnegative");
    }
  }
}

void DualVector::set(std::size_t j, double value) {
  if (j >= size()) throw IndexError("dual index out of range");
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw ContractError("dual vector entries must be finite and nonnegative");
  }
  values_(static_cast<Eigen::Index>(j)) = value;
}

double psi(const PalParams& params, double h, double lam) {
  require_nonnegative(lam);
  const double shrunk = (1.0 - params.tau) * lam;
  const double active = std::max(params.rho * h + shrunk, 0.0);
  return (active * active - shrunk * shrunk) / (2.0 * params.rho);
}

double psi_grad_x_scalar(const PalParams& params, double h, double lam) {
  require_nonnegative(lam);
  return std::max(params.rho * h + (1.0 - params.tau) * lam, 0.0);
}

double psi_grad_lambda(const PalParams& params, double h, double lam) {
  require_nonnegative(lam);
  const double keep = 1.0 - params.tau;
  return keep * std::max(-keep * lam / params.rho, h);
}

double lagrangian_value(const ConstrainedProblem& problem, const PalParams& params,
                        const Vector& x, const DualVector& lambda) {
  require_matching(problem, lambda);
  const Vector h = problem.constraint_values(x);
  double penalty = 0.0;
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    penalty += psi(params, h(static_cast<Eigen::Index>(j)), lambda[j]);
  }
  return problem.objective_value(x) + penalty / static_cast<double>(lambda.size());
}

Vector lagrangian_grad_x(const ConstrainedProblem& problem, const PalParams& params,
                         const Vector& x, const DualVector& lambda) {
  require_matching(problem, lambda);
  Vector grad = problem.objective_gradient(x);
  Vector constraint_grad(x.size());
  const double inv_m = 1.0 / static_cast<double>(lambda.size());
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    const double h = problem.constraint_value_and_gradient(j, x, constraint_grad);
    const double weight = psi_grad_x_scalar(params, h, lambda[j]);
    if (weight > 0.0) grad += (weight * inv_m) * constraint_grad;
  }
  return grad;
}

double smoothness_constant(const ProblemConstants& c, const PalParams& params, double lambda_l1,
                           std::size_t m) {
  if (!(lambda_l1 >= 0.0)) throw ContractError("lambda_l1 must be nonnegative");
  if (m == 0) throw ValidationError("m must be positive");
  return c.L_f + params.rho * c.B_h * c.B_h +
         (params.rho * c.M_h + (1.0 - params.tau) / static_cast<double>(m) * lambda_l1) * c.L_h;
}

double variance_constant(const ProblemConstants& c, const PalParams& params, double lambda_norm_sq) {
  if (!(lambda_norm_sq >= 0.0)) throw ContractError("lambda norm must be nonnegative");
  const double keep = 1.0 - params.tau;
  return 2.0 * c.B_F * c.B_F +
         8.0 * (params.rho * params.rho * c.M_h * c.M_h + keep * keep * lambda_norm_sq) * c.B_h * c.B_h;
}

DualBound dual_bound(const ProblemConstants& c, const PalParams& params) {
  if (params.tau <= 0.0) return {};
  return {params.rho * c.M_h / params.tau, true};
}

PalConstants pal_constants(const ProblemConstants& c, const PalParams& params,
                           const DualVector& lambda) {
  PalConstants out;
  out.L_smooth = smoothness_constant(c, params, lambda.l1_norm(), std::max<std::size_t>(lambda.size(), 1));
  out.B_sq = variance_constant(c, params, lambda.values().squaredNorm());
  out.dual_bound = dual_bound(c, params);
  return out;
}

}  // namespace sgdpa
