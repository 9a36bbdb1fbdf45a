#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "sgdpa/sgdpa.hpp"

namespace sgdpa {

/// Competitor methods sharing the SGDPA trace and stopping surface.
///
///  * pdsg: stochastic, classical AL (τ = 0), one shared sample j per
///    iteration, dual ascent evaluated at the previous primal iterate.
///  * lalm: deterministic linearized AL; full-gradient projected step then
///    full multiplier ascent λ ← (ρh(x⁺) + λ)₊. One iteration is one epoch.
struct BaselineConfig {
  enum class Method { pdsg, lalm };

  Method method = Method::pdsg;
  double rho = 10.0;
  StepsizeSchedule schedule = StepsizeSchedule::polynomial(1.0, 0.5);
  std::uint64_t rng_seed = 0;
  std::uint64_t rng_stream = 0;
  StoppingRule stop;
  std::uint64_t max_iters = 100000;
  std::optional<double> reference_objective;
  std::optional<Vector> x0;
  std::optional<DualVector> lambda0;
  TraceOptions trace;
  RecordSink sink;

  void validate() const;
  PalParams pal() const { return {rho, 0.0}; }
  /// Equivalent SGDPA configuration (τ = 0), used for state setup.
  SgdpaConfig as_sgdpa() const;
};

std::string to_string(BaselineConfig::Method method);

SolverState pdsg_iterate(const ConstrainedProblem& problem, const BaselineConfig& config,
                         SolverState state);
SolverState lalm_iterate(const ConstrainedProblem& problem, const BaselineConfig& config,
                         SolverState state);

/// Runs the configured baseline. LALM metrics are always taken at the last
/// iterate; PDSG follows stop.evaluate_on.
std::pair<SolveReport, Trace> solve_baseline(const ConstrainedProblem& problem,
                                             const BaselineConfig& config);

struct ReferenceSolution {
  double objective = 0.0;
  Vector x;
  DualVector lambda;
  std::uint64_t iterations = 0;
  double feasibility_sq = 0.0;
  bool converged = false;
  double feas_sq_tol = 1e-8;
};

/// High-accuracy LALM run for F*: constant step α, last iterate. Stops once
/// ‖x_{k+1} − x_k‖/α ≤ step_tol, ‖λ_{k+1} − λ_k‖/ρ ≤ step_tol and
/// ‖max(0, h(x))‖² ≤ feas_sq_tol, or when max_iters is used up
/// (converged = false then).
ReferenceSolution reference_lalm(const ConstrainedProblem& problem, double rho,
                                 std::optional<double> alpha = std::nullopt,
                                 std::uint64_t max_iters = 2000000, double feas_sq_tol = 1e-8,
                                 double step_tol = 1e-9);

}  // namespace sgdpa
