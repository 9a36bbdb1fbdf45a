#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sgdpa/linalg.hpp"
#include "sgdpa/problem.hpp"
#include "sgdpa/sgdpa.hpp"

namespace sgdpa {

/// x(t+1) = A x(t) + B u(t), stage cost ½xᵀQx + ½uᵀRu, terminal cost ½xᵀQx,
/// inputs restricted to `input_set`, prediction horizon N.
struct LtiModel {
  Matrix A;
  Matrix B;
  Matrix Q;
  Matrix R;
  SimpleSet input_set = SimpleSet::full_space();
  std::size_t horizon = 1;

  std::size_t nx() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t nu() const { return static_cast<std::size_t>(B.cols()); }

  /// Consistent dimensions, N ≥ 1, Q and R symmetric PSD.
  void validate() const;
};

/// {x : (x − c)ᵀP(x − c) ≤ 1}.
struct Ellipsoid {
  Matrix P;
  Vector c;
};

/// Stage sets X_1..X_N. A single entry applies to every stage.
struct EllipsoidSequence {
  std::vector<Ellipsoid> stages;

  /// Set for stage k ∈ [1, N].
  const Ellipsoid& at(std::size_t k) const;
  void validate(std::size_t nx, std::size_t horizon) const;
};

/// Input-only QCQP over u = (u(0), …, u(N−1)) ∈ U^N. Constraint k−1 encodes
/// x(k) ∈ X_k for k = 1..N.
struct CondensedQcqp {
  /// A_k = A^k, k = 1..N (index k−1).
  std::vector<Matrix> A_k;
  /// B_k = [A^{k−1}B … AB B 0 … 0], k = 1..N (index k−1).
  std::vector<Matrix> B_k;
  QcqpInstance instance;
  /// ½x₀ᵀQx₀ + Σ_k ½(A_kx₀)ᵀQ(A_kx₀): the part of the closed-form cost that
  /// does not depend on u.
  double objective_offset = 0.0;
  Vector x0;

  /// Predicted x(k) = A_kx₀ + B_ku for k ∈ [0, N].
  Vector predict(std::size_t k, const Vector& u) const;
  /// Full horizon cost Σ_{k<N} ℓ(x(k), u(k)) + ½x(N)ᵀQx(N).
  double horizon_cost(const Vector& u) const;
};

CondensedQcqp condense(const LtiModel& model, const EllipsoidSequence& ellipsoids,
                       const Vector& x0);

struct MpcSolverOptions {
  /// Solver settings reused at every step; x0, lambda0 and the schedule's α₀
  /// are overwritten per step.
  SgdpaConfig base;
  /// α₀ for every step; default_alpha0 of the condensed problem when absent.
  std::optional<double> alpha0;
  /// Shift the previous (u, λ) by one stage as the next start.
  bool warm_start = true;
  /// Abort the loop on an unconverged inner solve instead of flagging it.
  bool strict = false;
};

struct ClosedLoopStep {
  std::size_t t = 0;
  Vector x;
  Vector u;
  std::uint64_t solve_iters = 0;
  OptimalityReport report;
  StopReason reason = StopReason::budget;
  bool converged = false;
};

struct ClosedLoopTrace {
  std::vector<ClosedLoopStep> steps;
  Vector x_final;

  /// Columns t, x_0..x_{nx−1}, u_0..u_{nu−1}, solve_iters, feasibility_sq;
  /// a last row holds x(n_steps) with empty input fields.
  void write_csv(std::ostream& out) const;
};

/// Receding-horizon simulation: condense at the current state, solve with
/// SGDPA, apply u*(0), advance the state. The applied solution is the
/// metric point of base.stop (averaged iterate by default).
ClosedLoopTrace receding_horizon(const LtiModel& model, const EllipsoidSequence& ellipsoids,
                                 const Vector& x0, std::size_t n_steps,
                                 const MpcSolverOptions& options);

/// Model file contents.
struct MpcScenario {
  LtiModel model;
  EllipsoidSequence ellipsoids;
  Vector x0;
  std::size_t n_steps = 1;
};

/// Keys A, B, Q, R (lists of rows), N, input_box {lower, upper},
/// ellipsoids [{P, c}], x0, n_steps.
MpcScenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const MpcScenario& scenario);
MpcScenario read_scenario(const std::filesystem::path& path);

/// Double integrator with sampling time 0.2: x = (position, velocity),
/// |u| ≤ 1, Q = I, R = 0.1, N = 10, ellipsoids ‖x‖ ≤ 5 centered at the origin,
/// x₀ = (1, 0), 40 steps.
MpcScenario double_integrator_scenario();

}  // namespace sgdpa
