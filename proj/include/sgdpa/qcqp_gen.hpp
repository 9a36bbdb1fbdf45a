#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "sgdpa/linalg.hpp"
#include "sgdpa/problem.hpp"
#include "sgdpa/rng.hpp"

namespace sgdpa {

/// Synthetic QCQP family over Y = R^n_+:
///   Q_i = Y_iᵀ D_i Y_i with Y_i Haar-orthogonal and D_i holding ⌊n/10⌋ zeros
///   (uniformly placed) and U(0,1) entries elsewhere. Q_f is built the same
///   way, or with an all-U(0,1) diagonal when strongly convex. q_i ~ U(0,1)ⁿ.
struct GenSpec {
  enum class ObjectiveKind { convex, strongly_convex };
  enum class BScenario { feasible_point_offset, uniform_random };
  /// Support of the entries of q_f: (0,1), (−1,0) or (−1,1).
  ///
  /// With the default (0,1) and Y = R^n_+ the origin is optimal and every
  /// constraint inactive, since ∇F(0) = q_f > 0 and h_i(0) = −b_i < 0. The
  /// other supports push the minimizer into the constraints.
  enum class LinearSupport { positive, negative, symmetric };

  std::size_t n = 20;
  std::size_t m = 50;
  ObjectiveKind objective_kind = ObjectiveKind::convex;
  BScenario b_scenario = BScenario::uniform_random;
  LinearSupport objective_linear = LinearSupport::positive;
  std::uint64_t seed = 0;

  /// n, m ≥ 1, and n ≥ 10 for the convex objective.
  void validate() const;
  /// Compact JSON object recording every field.
  std::string to_json() const;
  static GenSpec from_json(const std::string& text);
};

std::string to_string(GenSpec::ObjectiveKind kind);
std::string to_string(GenSpec::BScenario scenario);
std::string to_string(GenSpec::LinearSupport support);

/// Orthonormalizes a standard Gaussian n×n matrix by Householder QR and
/// flips column signs so that R has a positive diagonal, which makes the
/// result Haar distributed.
Matrix random_orthogonal(std::size_t n, CounterRng& rng);

/// Pure function of the spec. For feasible_point_offset the drawn x₀ is
/// stored as the instance start point; the spec is stored as provenance.
QcqpInstance generate(const GenSpec& spec);

struct TinyInstance {
  QcqpInstance instance;
  Vector x_star;
  double f_star = 0.25;
  /// Multiplier with (1−τ)λ*·∇h(x*) = −∇F(x*) (m = 1), i.e. 0.5/(1−τ).
  double lambda_star = 0.5;
};

/// min ½‖x‖²  s.t.  1 − x₁ − x₂ ≤ 0,  x ∈ R²₊, with x* = (½, ½) and F* = ¼.
TinyInstance tiny_analytic_instance(double tau = 0.0);

}  // namespace sgdpa
