#pragma once

// Driver shared by SGDPA and the baselines: budget, epoch-cadence stopping,
// trace recording and divergence checks. Not part of the public interface.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <utility>

#include "sgdpa/errors.hpp"
#include "sgdpa/sgdpa.hpp"

namespace sgdpa::detail {

struct LoopSettings {
  std::uint64_t max_iters = 1;
  std::uint64_t iters_per_epoch = 1;
  StoppingRule stop;
  std::optional<double> reference;
  TraceOptions trace;
  RecordSink sink;
  /// α_k, for the stepsize column.
  std::function<double(std::uint64_t)> step_at;
};

/// Adds x_{k+1} to the running average when k ≥ start. Weights are α_k, or 1
/// when `uniform`.
inline void accumulate_average(SolverState& state, std::uint64_t k, double alpha,
                               std::uint64_t start, bool uniform) {
  if (k < start) return;
  const double w = uniform ? 1.0 : alpha;
  if (state.weighted_sum.size() != state.x.size()) state.weighted_sum = Vector::Zero(state.x.size());
  state.weighted_sum.noalias() += w * state.x;
  state.weight_total += w;
}

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
    return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

inline Vector metric_point(const SolverState& state, MetricPoint which) {
  if (which == MetricPoint::averaged && state.weight_total > 0.0)
    return state.weighted_sum / state.weight_total;
  return state.x;
}

/// Log-spaced recording grid: ~points_per_decade iterations per decade.
class LogGrid {
 public:
  explicit LogGrid(int points_per_decade) : ppd_(points_per_decade) {}

  bool hit(std::uint64_t k) {
    if (ppd_ <= 0 || k < next_) return false;
    while (next_ <= k) {
      ++index_;
      const double target = std::ceil(std::pow(10.0, static_cast<double>(index_) / ppd_));
      next_ = std::max(next_ + 1, static_cast<std::uint64_t>(target));
    }
    return true;
  }

 private:
  int ppd_;
  int index_ = 0;
  std::uint64_t next_ = 1;
};

/// Runs `advance` (which performs one iteration on the state and returns the
/// step used) until the stopping rule fires or the budget is exhausted.
template <class Advance>
std::pair<SolveReport, Trace> run_loop(const ConstrainedProblem& problem, const LoopSettings& s,
                                       SolverState state, Advance&& advance) {
  const auto clock_start = std::chrono::steady_clock::now();
  const std::uint64_t ipe = std::max<std::uint64_t>(1, s.iters_per_epoch);
  const std::uint64_t budget = std::min(s.max_iters, saturating_mul(s.stop.max_epochs, ipe));
  const std::uint64_t stride = s.trace.stride == 0 ? ipe : s.trace.stride;
  const bool stall_armed = s.stop.stall_mode == StallMode::always ||
                           (s.stop.stall_mode == StallMode::automatic && !s.reference);
  const std::uint64_t k_begin = state.iter;

  Trace trace;
  LogGrid grid(s.trace.points_per_decade);
  std::deque<double> diffs;

  auto evaluate = [&](const SolverState& st) {
    return optimality_report(problem, metric_point(st, s.stop.evaluate_on), s.reference);
  };
  auto record = [&](const SolverState& st, const OptimalityReport& rep) {
    TraceRecord r;
    r.iter = st.iter;
    r.epoch = static_cast<double>(st.iter) / static_cast<double>(ipe);
    r.objective = rep.objective;
    r.gap = rep.objective_gap;
    r.mean_violation = rep.mean_violation;
    r.feasibility_sq = rep.feasibility_sq;
    r.stepsize = s.step_at ? s.step_at(st.iter) : 0.0;
    r.dual_norm = st.lambda.norm();
    if (s.trace.record_wall_time)
      r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            clock_start)
                      .count();
    trace.append(r);
    if (s.sink) s.sink(r);
  };

  record(state, evaluate(state));

  StopReason reason = StopReason::budget;
  while (state.iter - k_begin < budget) {
    const Vector previous = state.x;
    advance(state);
    if (!state.x.allFinite()) throw DivergedError(state.iter, "non-finite primal iterate");

    if (stall_armed) {
      diffs.push_back((state.x - previous).squaredNorm());
      if (diffs.size() > static_cast<std::size_t>(s.stop.stall_window)) diffs.pop_front();
    }

    const std::uint64_t done = state.iter - k_begin;
    const bool epoch_end = done % ipe == 0;
    const bool last = done == budget;
    std::optional<OptimalityReport> rep;
    if (epoch_end) {
      rep = evaluate(state);
      const bool feasible = rep->feasibility_sq <= s.stop.feas_sq_tol;
      if (s.reference && feasible && *rep->objective_gap <= s.stop.gap_tol) {
        reason = StopReason::feasible_optimal;
      } else if (stall_armed && diffs.size() == static_cast<std::size_t>(s.stop.stall_window) &&
                 *std::max_element(diffs.begin(), diffs.end()) <= s.stop.stall_tol) {
        reason = StopReason::stalled;
      }
    }
    const bool stopping = reason != StopReason::budget;
    const bool grid_hit = grid.hit(done);
    if (done % stride == 0 || grid_hit || last || stopping) {
      if (!rep) rep = evaluate(state);
      record(state, *rep);
    }
    if (stopping) break;
  }

  SolveReport report;
  report.x_last = state.x;
  report.x_hat = metric_point(state, MetricPoint::averaged);
  report.lambda_last = state.lambda;
  report.iterations = state.iter - k_begin;
  report.epochs = static_cast<double>(report.iterations) / static_cast<double>(ipe);
  report.reason = reason;
  report.final_report = evaluate(state);
  report.converged = reason != StopReason::budget;
  return {std::move(report), std::move(trace)};
}

}  // namespace sgdpa::detail
