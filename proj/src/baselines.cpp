#include "sgdpa/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "run_loop.hpp"
#include "sgdpa/errors.hpp"

namespace sgdpa {

void BaselineConfig::validate() const {
  pal().validate();
  stop.validate();
  if (max_iters < 1) throw ValidationError("max_iters must be at least 1");
}

SgdpaConfig BaselineConfig::as_sgdpa() const {
  SgdpaConfig c;
  c.pal = pal();
  c.schedule = schedule;
  c.max_iters = max_iters;
  c.rng_seed = rng_seed;
  c.rng_stream = rng_stream;
  c.stop = stop;
  c.reference_objective = reference_objective;
  c.x0 = x0;
  c.lambda0 = lambda0;
  c.trace = trace;
  return c;
}

std::string to_string(BaselineConfig::Method method) {
  return method == BaselineConfig::Method::pdsg ? "pdsg" : "lalm";
}

namespace {

double pdsg_advance(const ConstrainedProblem& problem, const BaselineConfig& config,
                    SolverState& state) {
  const std::uint64_t k = state.iter;
  const double alpha = config.schedule.step(k);
  const std::size_t j = state.rng.uniform_index(problem.num_constraints());
  // Dual ascent uses h_j at the old iterate x_k.
  const double h_old = problem.constraint_value(j, state.x);
  state.x = primal_step(problem, config.pal(), state.x, state.lambda, j, alpha);
  if (!std::isfinite(h_old)) throw DivergedError(k + 1, "non-finite constraint value");
  state.lambda.set(j, std::max(0.0, state.lambda[j] + config.rho * h_old));
  detail::accumulate_average(state, k, alpha, config.schedule.default_averaging_start(),
                             config.schedule.uniform_averaging());
  state.iter = k + 1;
  return alpha;
}

double lalm_advance(const ConstrainedProblem& problem, const BaselineConfig& config,
                    SolverState& state) {
  const std::uint64_t k = state.iter;
  const double alpha = config.schedule.step(k);
  const Vector g = lagrangian_grad_x(problem, config.pal(), state.x, state.lambda);
  state.x = problem.project(state.x - alpha * g);
  const Vector h = problem.constraint_values(state.x);
  if (!h.allFinite()) throw DivergedError(k + 1, "non-finite constraint value");
  Vector next = (config.rho * h + state.lambda.values()).cwiseMax(0.0);
  state.lambda = DualVector(std::move(next));
  detail::accumulate_average(state, k, alpha, config.schedule.default_averaging_start(),
                             config.schedule.uniform_averaging());
  state.iter = k + 1;
  return alpha;
}

}  // namespace

SolverState pdsg_iterate(const ConstrainedProblem& problem, const BaselineConfig& config,
                         SolverState state) {
  pdsg_advance(problem, config, state);
  return state;
}

SolverState lalm_iterate(const ConstrainedProblem& problem, const BaselineConfig& config,
                         SolverState state) {
  lalm_advance(problem, config, state);
  return state;
}

std::pair<SolveReport, Trace> solve_baseline(const ConstrainedProblem& problem,
                                             const BaselineConfig& config) {
  config.validate();
  const bool lalm = config.method == BaselineConfig::Method::lalm;
  detail::LoopSettings s;
  s.max_iters = config.max_iters;
  s.iters_per_epoch = lalm ? 1 : problem.num_constraints();
  s.stop = config.stop;
  if (lalm) s.stop.evaluate_on = MetricPoint::last;
  s.reference = config.reference_objective;
  s.trace = config.trace;
  s.sink = config.sink;
  s.step_at = [&config](std::uint64_t k) { return config.schedule.step(k); };
  SolverState state = initial_state(problem, config.as_sgdpa());
  if (lalm)
    return detail::run_loop(problem, s, std::move(state),
                            [&](SolverState& st) { return lalm_advance(problem, config, st); });
  return detail::run_loop(problem, s, std::move(state),
                          [&](SolverState& st) { return pdsg_advance(problem, config, st); });
}

ReferenceSolution reference_lalm(const ConstrainedProblem& problem, double rho,
                                 std::optional<double> alpha, std::uint64_t max_iters,
                                 double feas_sq_tol, double step_tol) {
  BaselineConfig cfg;
  cfg.method = BaselineConfig::Method::lalm;
  cfg.rho = rho;
  const double a = alpha ? *alpha : 1.0 / smoothness_constant(problem.constants(), cfg.pal(), 0.0,
                                                              problem.num_constraints());
  cfg.schedule = StepsizeSchedule::constant(a);
  cfg.validate();

  SolverState state = initial_state(problem, cfg.as_sgdpa());
  ReferenceSolution out;
  out.feas_sq_tol = feas_sq_tol;
  for (std::uint64_t k = 0; k < max_iters; ++k) {
    const Vector previous = state.x;
    const Vector previous_lambda = state.lambda.values();
    lalm_advance(problem, cfg, state);
    if (!state.x.allFinite()) throw DivergedError(state.iter, "reference run diverged");
    // Primal gradient mapping and dual residual, both scale-free in the step.
    const double primal = (state.x - previous).norm() / a;
    const double dual = (state.lambda.values() - previous_lambda).norm() / rho;
    if (primal <= step_tol && dual <= step_tol) {
      const auto rep = optimality_report(problem, state.x);
      if (rep.feasibility_sq <= feas_sq_tol) {
        out.converged = true;
        break;
      }
    }
  }
  const auto rep = optimality_report(problem, state.x);
  out.objective = rep.objective;
  out.feasibility_sq = rep.feasibility_sq;
  out.x = state.x;
  out.lambda = state.lambda;
  out.iterations = state.iter;
  return out;
}

}  // namespace sgdpa
