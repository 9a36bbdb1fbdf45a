#include "sgdpa/sgdpa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "run_loop.hpp"
#include "sgdpa/errors.hpp"
#include "sgdpa/qcqp_io.hpp"

namespace sgdpa {

void StoppingRule::validate() const {
  if (!(feas_sq_tol > 0.0)) throw ValidationError("feas_sq_tol must be positive");
  if (!(gap_tol > 0.0)) throw ValidationError("gap_tol must be positive");
  if (!(stall_tol > 0.0)) throw ValidationError("stall_tol must be positive");
  if (stall_window < 1) throw ValidationError("stall_window must be at least 1");
}

void Trace::append(const TraceRecord& record) {
  if (!records.empty() && record.iter <= records.back().iter)
    throw ValidationError("trace records must be strictly increasing in iter");
  records.push_back(record);
}

std::string trace_record_csv(const TraceRecord& r) {
  std::string line = std::to_string(r.iter);
  auto add = [&line](double v) {
    line += ',';
    line += format_real(v);
  };
  add(r.epoch);
  add(r.objective);
  line += ',';
  if (r.gap) line += format_real(*r.gap);
  add(r.mean_violation);
  add(r.feasibility_sq);
  add(r.stepsize);
  add(r.dual_norm);
  add(r.wall_ms);
  return line;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace.records) out << trace_record_csv(r) << '\n';
}

namespace {

double parse_real(const std::string& field) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size())
    throw ValidationError("malformed trace field '" + field + "'");
  return v;
}

}  // namespace

Trace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceCsvHeader)
    throw ValidationError("trace CSV header mismatch");
  Trace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 9) throw ValidationError("trace CSV row must have 9 fields");
    TraceRecord r;
    r.iter = std::stoull(f[0]);
    r.epoch = parse_real(f[1]);
    r.objective = parse_real(f[2]);
    if (!f[3].empty()) r.gap = parse_real(f[3]);
    r.mean_violation = parse_real(f[4]);
    r.feasibility_sq = parse_real(f[5]);
    r.stepsize = parse_real(f[6]);
    r.dual_norm = parse_real(f[7]);
    r.wall_ms = parse_real(f[8]);
    trace.append(r);
  }
  return trace;
}

void SgdpaConfig::validate() const {
  pal.validate();
  stop.validate();
  if (max_iters < 1) throw ValidationError("max_iters must be at least 1");
  if (averaging_start && *averaging_start >= max_iters)
    throw ValidationError("averaging_start must be below max_iters");
  if (assumed_dual_bound && !(*assumed_dual_bound > 0.0))
    throw ValidationError("assumed_dual_bound must be positive");
}

SolverState initial_state(const ConstrainedProblem& problem, const SgdpaConfig& config) {
  const auto n = static_cast<Eigen::Index>(problem.dimension());
  const std::size_t m = problem.num_constraints();
  SolverState state;
  if (config.x0) {
    if (config.x0->size() != n) throw DimensionError("x0 has the wrong dimension");
    state.x = problem.project(*config.x0);
  } else {
    state.x = problem.project(Vector::Zero(n));
  }
  if (config.lambda0) {
    if (config.lambda0->size() != m) throw DimensionError("lambda0 has the wrong dimension");
    state.lambda = *config.lambda0;
  } else {
    state.lambda = DualVector(m);
  }
  state.weighted_sum = Vector::Zero(n);
  state.rng = CounterRng(config.rng_seed, config.rng_stream);
  return state;
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::feasible_optimal:
      return "feasible_optimal";
    case StopReason::stalled:
      return "stalled";
    case StopReason::budget:
      return "budget";
  }
  return "unknown";
}

Vector primal_step(const ConstrainedProblem& problem, const PalParams& params, const Vector& x,
                   const DualVector& lambda, std::size_t j, double alpha) {
  if (!(alpha > 0.0)) throw ContractError("stepsize must be positive");
  if (j >= lambda.size()) throw IndexError("constraint index out of range");
  Vector grad_h;
  const double h = problem.constraint_value_and_gradient(j, x, grad_h);
  Vector g = problem.objective_gradient(x);
  const double c = psi_grad_x_scalar(params, h, lambda[j]);
  if (c > 0.0) g.noalias() += c * grad_h;
  return problem.project(x - alpha * g);
}

DualVector dual_step(const PalParams& params, const DualVector& lambda, std::size_t jbar,
                     double h_value) {
  if (jbar >= lambda.size()) throw IndexError("constraint index out of range");
  DualVector next = lambda;
  next.set(jbar, std::max(0.0, (1.0 - params.tau) * lambda[jbar] + params.rho * h_value));
  return next;
}

double sgdpa_advance(const ConstrainedProblem& problem, const SgdpaConfig& config,
                     SolverState& state) {
  const std::size_t m = problem.num_constraints();
  const std::uint64_t k = state.iter;
  const double alpha = config.schedule.step(k);
  const std::size_t j = state.rng.uniform_index(m);
  state.x = primal_step(problem, config.pal, state.x, state.lambda, j, alpha);
  const std::size_t jbar = state.rng.uniform_index(m);
  const double h = problem.constraint_value(jbar, state.x);
  if (!std::isfinite(h)) throw DivergedError(k + 1, "non-finite constraint value");
  state.lambda.set(jbar, std::max(0.0, (1.0 - config.pal.tau) * state.lambda[jbar] + config.pal.rho * h));
  detail::accumulate_average(state, k, alpha, config.effective_averaging_start(),
                             config.schedule.uniform_averaging());
  state.iter = k + 1;
  return alpha;
}

SolverState sgdpa_iterate(const ConstrainedProblem& problem, const SgdpaConfig& config,
                          SolverState state) {
  sgdpa_advance(problem, config, state);
  return state;
}

Vector averaged_iterate(const SolverState& state) {
  if (!(state.weight_total > 0.0)) throw ValidationError("no averaged step has been taken yet");
  return state.weighted_sum / state.weight_total;
}

std::pair<SolveReport, Trace> solve(const ConstrainedProblem& problem, const SgdpaConfig& config) {
  config.validate();
  detail::LoopSettings s;
  s.max_iters = config.max_iters;
  s.iters_per_epoch = problem.num_constraints();
  s.stop = config.stop;
  s.reference = config.reference_objective;
  s.trace = config.trace;
  s.sink = config.sink;
  s.step_at = [&config](std::uint64_t k) { return config.schedule.step(k); };
  return detail::run_loop(problem, s, initial_state(problem, config),
                          [&](SolverState& st) { return sgdpa_advance(problem, config, st); });
}

void RestartOptions::validate() const {
  if (initial_budget < 1) throw ValidationError("initial budget must be at least 1");
  if (!(budget_growth > 1.0)) throw ValidationError("budget growth factor must exceed 1");
  if (!(step_shrink > 0.0 && step_shrink < 1.0))
    throw ValidationError("step shrink factor must lie in (0, 1)");
  if (alpha0_initial && !(*alpha0_initial > 0.0))
    throw ValidationError("initial alpha0 must be positive");
  if (max_restarts < 0) throw ValidationError("max_restarts must be nonnegative");
}

std::pair<SolveReport, Trace> solve_with_restarts(const ConstrainedProblem& problem,
                                                  const SgdpaConfig& base_config,
                                                  const RestartOptions& restart) {
  restart.validate();
  base_config.validate();
  double alpha0 = restart.alpha0_initial.value_or(base_config.schedule.alpha0());
  double budget = static_cast<double>(restart.initial_budget);
  std::optional<Vector> warm_x = base_config.x0;
  std::optional<DualVector> warm_lambda = base_config.lambda0;

  Trace combined;
  SolveReport last_report;
  bool have_report = false;
  std::uint64_t offset = 0;

  for (int t = 0; t <= restart.max_restarts; ++t) {
    SgdpaConfig cfg = base_config;
    cfg.schedule = base_config.schedule.with_alpha0(alpha0);
    cfg.max_iters = static_cast<std::uint64_t>(std::llround(budget));
    cfg.rng_stream = static_cast<std::uint64_t>(t);
    cfg.x0 = warm_x;
    cfg.lambda0 = warm_lambda;
    cfg.sink = nullptr;
    if (cfg.averaging_start && *cfg.averaging_start >= cfg.max_iters) cfg.averaging_start.reset();

    combined.restart_starts.push_back(combined.records.size());
    try {
      auto [report, trace] = solve(problem, cfg);
      for (auto r : trace.records) {
        if (t > 0 && r.iter == 0) continue;
        r.iter += offset;
        combined.append(r);
        if (base_config.sink) base_config.sink(r);
      }
      offset += report.iterations;
      report.restarts = t;
      warm_x = report.x_last;
      warm_lambda = report.lambda_last;
      last_report = std::move(report);
      have_report = true;
      if (last_report.converged) return {std::move(last_report), std::move(combined)};
    } catch (const DivergedError& e) {
      // Keep the previous finite warm start; the trial's iterations still count.
      offset += e.iteration();
    }
    budget *= restart.budget_growth;
    alpha0 *= restart.step_shrink;
  }

  if (!have_report) throw DivergedError(offset, "every restart trial diverged");
  last_report.restarts = restart.max_restarts;
  last_report.converged = false;
  return {std::move(last_report), std::move(combined)};
}

double default_alpha0(const ConstrainedProblem& problem, const PalParams& params,
                      std::optional<double> assumed_dual_bound) {
  params.validate();
  const auto& c = problem.constants();
  const std::size_t m = problem.num_constraints();
  double lambda_l1 = 0.0;
  if (assumed_dual_bound) {
    lambda_l1 = std::sqrt(static_cast<double>(m)) * *assumed_dual_bound;
  } else if (params.tau > 0.0) {
    lambda_l1 = static_cast<double>(m) * dual_bound(c, params).value;
  }
  const double L = smoothness_constant(c, params, lambda_l1, m);
  if (!(L > 0.0)) throw ValidationError("smoothness constant is zero; supply alpha0 explicitly");
  return 2.0 / L;
}

double rate_slope(const Trace& trace, RateMetric metric, std::uint64_t k_lo, std::uint64_t k_hi) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& r : trace.records) {
    if (r.iter < k_lo || r.iter > k_hi || r.iter == 0) continue;
    double v = 0.0;
    if (metric == RateMetric::gap) {
      if (!r.gap) throw ValidationError("trace has no gap values");
      v = *r.gap;
    } else {
      v = r.mean_violation;
    }
    if (!(v > 0.0) || !std::isfinite(v))
      throw ValidationError("rate_slope needs positive metric values in the window");
    lx.push_back(std::log(static_cast<double>(r.iter)));
    ly.push_back(std::log(v));
  }
  if (lx.size() < 10) throw ValidationError("rate_slope needs at least 10 records in the window");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (!(sxx > 0.0)) throw ValidationError("rate_slope window spans a single iteration");
  return sxy / sxx;
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

Trace median_trace(const std::vector<Trace>& traces) {
  if (traces.empty()) throw ValidationError("median_trace needs at least one trace");
  const auto& first = traces.front().records;
  for (const auto& t : traces) {
    if (t.records.size() != first.size()) throw ValidationError("traces have different lengths");
    for (std::size_t i = 0; i < first.size(); ++i)
      if (t.records[i].iter != first[i].iter)
        throw ValidationError("traces are recorded at different iterations");
  }
  Trace out;
  for (std::size_t i = 0; i < first.size(); ++i) {
    auto column = [&](auto field) {
      std::vector<double> v;
      v.reserve(traces.size());
      for (const auto& t : traces) v.push_back(field(t.records[i]));
      return median_of(std::move(v));
    };
    TraceRecord r = first[i];
    r.objective = column([](const TraceRecord& x) { return x.objective; });
    r.mean_violation = column([](const TraceRecord& x) { return x.mean_violation; });
    r.feasibility_sq = column([](const TraceRecord& x) { return x.feasibility_sq; });
    r.stepsize = column([](const TraceRecord& x) { return x.stepsize; });
    r.dual_norm = column([](const TraceRecord& x) { return x.dual_norm; });
    r.wall_ms = column([](const TraceRecord& x) { return x.wall_ms; });
    const bool all_gaps = std::all_of(traces.begin(), traces.end(),
                                      [i](const Trace& t) { return t.records[i].gap.has_value(); });
    if (all_gaps) r.gap = column([](const TraceRecord& x) { return *x.gap; });
    else r.gap.reset();
    out.append(r);
  }
  return out;
}

}  // namespace sgdpa
