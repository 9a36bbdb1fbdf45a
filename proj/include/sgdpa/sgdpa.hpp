#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sgdpa/lagrangian.hpp"
#include "sgdpa/linalg.hpp"
#include "sgdpa/problem.hpp"
#include "sgdpa/rng.hpp"
#include "sgdpa/schedule.hpp"

namespace sgdpa {

/// Which primal point the stopping tests and trace metrics look at.
enum class MetricPoint { averaged, last };

/// When the successive-difference stall test is armed. `automatic` arms it
/// only when no reference objective value is known.
enum class StallMode { automatic, always, never };

struct StoppingRule {
  /// ‖max(0, h(x))‖² threshold.
  double feas_sq_tol = 1e-2;
  /// |F(x) − F*| threshold; only used when a reference F* is configured.
  double gap_tol = 1e-2;
  /// Stall test: max of the last M values of ‖x_{k+1} − x_k‖² ≤ stall_tol.
  int stall_window = 10;
  double stall_tol = 1e-3;
  std::uint64_t max_epochs = std::numeric_limits<std::uint64_t>::max();
  MetricPoint evaluate_on = MetricPoint::averaged;
  StallMode stall_mode = StallMode::automatic;

  void validate() const;
};

struct TraceOptions {
  /// Record every `stride` iterations; 0 means once per epoch.
  std::uint64_t stride = 0;
  /// Additionally record at ~this many log-spaced iterations per decade.
  int points_per_decade = 0;
  /// When false the wall_ms column is written as 0 so traces are
  /// byte-reproducible.
  bool record_wall_time = true;
};

struct TraceRecord {
  std::uint64_t iter = 0;
  double epoch = 0.0;
  double objective = 0.0;
  std::optional<double> gap;
  double mean_violation = 0.0;
  double feasibility_sq = 0.0;
  double stepsize = 0.0;
  double dual_norm = 0.0;
  double wall_ms = 0.0;
};

/// Per-iteration metrics. Records are strictly increasing in `iter`.
struct Trace {
  std::vector<TraceRecord> records;
  /// Record index at which each restart trial begins (restart wrapper only).
  std::vector<std::size_t> restart_starts;

  /// Throws ValidationError if the record does not advance `iter`.
  void append(const TraceRecord& record);
};

/// Fixed CSV columns of trace files.
inline constexpr const char* kTraceCsvHeader =
    "iter,epoch,objective,gap,mean_violation,feasibility_sq,stepsize,dual_norm,wall_ms";

std::string trace_record_csv(const TraceRecord& record);
void write_trace_csv(std::ostream& out, const Trace& trace);
Trace read_trace_csv(std::istream& in);

using RecordSink = std::function<void(const TraceRecord&)>;

struct SgdpaConfig {
  PalParams pal;
  StepsizeSchedule schedule = StepsizeSchedule::polynomial(1.0, 0.5);
  std::uint64_t max_iters = 100000;
  std::uint64_t rng_seed = 0;
  /// Selects an independent substream of the seed (restart trials use it).
  std::uint64_t rng_stream = 0;
  /// B_D with ‖λ_k‖ ≤ B_D assumed; only used to derive default step sizes.
  std::optional<double> assumed_dual_bound;
  /// First iteration entering the running average; defaults to
  /// schedule.default_averaging_start().
  std::optional<std::uint64_t> averaging_start;
  StoppingRule stop;
  /// Reference optimal value F*, enabling gap metrics and the optimality stop.
  std::optional<double> reference_objective;
  /// Start point (projected onto Y); zeros when absent.
  std::optional<Vector> x0;
  /// Start multipliers; zeros when absent.
  std::optional<DualVector> lambda0;
  TraceOptions trace;
  /// Optional append-only consumer of trace records as they are produced.
  RecordSink sink;

  void validate() const;
  std::uint64_t effective_averaging_start() const {
    return averaging_start.value_or(schedule.default_averaging_start());
  }
};

struct SolverState {
  Vector x;
  DualVector lambda;
  /// Σ w_t x_{t+1} with w_t = α_t (or 1 for uniform averaging).
  Vector weighted_sum;
  /// Σ w_t.
  double weight_total = 0.0;
  std::uint64_t iter = 0;
  CounterRng rng;

  friend bool operator==(const SolverState& a, const SolverState& b) {
    return a.x == b.x && a.lambda == b.lambda && a.weighted_sum == b.weighted_sum &&
           a.weight_total == b.weight_total && a.iter == b.iter && a.rng == b.rng;
  }
};

/// State at iteration 0: projected x0, λ0, empty accumulators.
SolverState initial_state(const ConstrainedProblem& problem, const SgdpaConfig& config);

enum class StopReason { feasible_optimal, stalled, budget };
std::string to_string(StopReason reason);

struct SolveReport {
  /// Averaged iterate (falls back to the last iterate before any averaged step).
  Vector x_hat;
  Vector x_last;
  DualVector lambda_last;
  std::uint64_t iterations = 0;
  double epochs = 0.0;
  StopReason reason = StopReason::budget;
  /// Metrics at the configured metric point.
  OptimalityReport final_report;
  int restarts = 0;
  bool converged = false;
};

/// Π_Y( x − α(∇F(x) + (ρh_j(x) + (1−τ)λ_j)₊ ∇h_j(x)) ).
Vector primal_step(const ConstrainedProblem& problem, const PalParams& params, const Vector& x,
                   const DualVector& lambda, std::size_t j, double alpha);

/// Coordinate jbar becomes max(0, (1−τ)λ_jbar + ρ·h_value), which equals
/// (1−τ)λ + ρ·max(−(1−τ)λ/ρ, h) and lands exactly on 0 in the clamp branch.
/// `h_value` must be h_jbar at the new primal iterate.
DualVector dual_step(const PalParams& params, const DualVector& lambda, std::size_t jbar,
                     double h_value);

/// One iteration: sample j_k, primal step, sample j̄_k independently,
/// dual step at x_{k+1}, update the running average.
SolverState sgdpa_iterate(const ConstrainedProblem& problem, const SgdpaConfig& config,
                          SolverState state);

/// In-place form of sgdpa_iterate; returns the step α_k used.
double sgdpa_advance(const ConstrainedProblem& problem, const SgdpaConfig& config,
                     SolverState& state);

/// weighted_sum / weight_total; throws ValidationError before the first
/// averaged step.
Vector averaged_iterate(const SolverState& state);

/// Runs SGDPA until the stopping rule fires or the budget
/// min(max_iters, max_epochs·m) is used up. Stopping metrics are evaluated
/// once per epoch (m iterations). Throws DivergedError on non-finite iterates.
std::pair<SolveReport, Trace> solve(const ConstrainedProblem& problem, const SgdpaConfig& config);

struct RestartOptions {
  std::uint64_t initial_budget = 1000;
  double budget_growth = 2.0;
  double step_shrink = 0.5;
  /// Initial α₀ of the first trial; defaults to the base schedule's α₀.
  std::optional<double> alpha0_initial;
  int max_restarts = 10;

  void validate() const;
};

/// Trial-step-size wrapper: runs solve with budget K_t and α₀ᵗ, and on failure
/// sets K_{t+1} = ζ₁K_t, α₀^{t+1} = ζ₂α₀ᵗ, warm-starting from the previous
/// trial's last (x, λ). A trial succeeds when it stops for any reason other
/// than the budget; a diverged trial counts as failed and the next trial
/// restarts from the last finite warm start.
std::pair<SolveReport, Trace> solve_with_restarts(const ConstrainedProblem& problem,
                                                  const SgdpaConfig& base_config,
                                                  const RestartOptions& restart);

/// Default α₀ = 2/L with L the smoothness constant at the multiplier bound
/// in force: the assumed bound B_D (‖λ‖₁ ≤ √m·B_D) if given, otherwise the
/// bound ρM_h/τ when τ > 0, otherwise λ = 0.
double default_alpha0(const ConstrainedProblem& problem, const PalParams& params,
                      std::optional<double> assumed_dual_bound = std::nullopt);

enum class RateMetric { gap, mean_violation };

/// Least-squares slope of log(metric) against log(iter) over records with
/// iter ∈ [k_lo, k_hi]. Needs ≥ 10 such records, all with positive metric.
double rate_slope(const Trace& trace, RateMetric metric, std::uint64_t k_lo, std::uint64_t k_hi);

/// Pointwise median over traces that share the same record iterations.
Trace median_trace(const std::vector<Trace>& traces);

}  // namespace sgdpa
