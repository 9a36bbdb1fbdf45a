#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <sstream>

#include "sgdpa/errors.hpp"
#include "sgdpa/qcqp_gen.hpp"
#include "sgdpa/schedule.hpp"
#include "sgdpa/sgdpa.hpp"
#include "test_util.hpp"

namespace sgdpa {
namespace {

using testing::vec;

// 0.999 quantile of the chi-square distribution with 99 degrees of freedom.
constexpr double kChiSquare99At0001 = 148.2303591651;

QcqpProblem tiny_problem(double tau = 0.0) { return QcqpProblem(tiny_analytic_instance(tau).instance, 1.0); }

QcqpProblem small_generated(std::uint64_t seed, std::size_t m = 10) {
  GenSpec spec;
  spec.n = 10;
  spec.m = m;
  spec.seed = seed;
  spec.objective_linear = GenSpec::LinearSupport::symmetric;
  return QcqpProblem(generate(spec), 1.0);
}

TEST(Schedule, PolynomialValuesAndMonotonicity) {
  const auto s = StepsizeSchedule::polynomial(2.0, 0.5);
  EXPECT_DOUBLE_EQ(s.step(0), 2.0);
  EXPECT_DOUBLE_EQ(s.step(3), 1.0);
  const auto s1 = StepsizeSchedule::polynomial(1.0, 0.75);
  for (std::uint64_t k = 0; k < 10000; ++k) {
    EXPECT_LT(s1.step(k + 1), s1.step(k));
    EXPECT_GT(s1.step(k + 1), 0.0);
  }
  EXPECT_EQ(s.transition_index(), 0u);
  EXPECT_EQ(s.default_averaging_start(), 0u);
  EXPECT_FALSE(s.uniform_averaging());
}

TEST(Schedule, StronglyConvexPhases) {
  // 2/(μα₀) − 1 = 9 for μ = 0.2, α₀ = 1.
  const auto s = StepsizeSchedule::strongly_convex(1.0, 0.2);
  EXPECT_EQ(s.transition_index(), 9u);
  EXPECT_EQ(s.default_averaging_start(), 10u);
  EXPECT_TRUE(s.uniform_averaging());
  for (std::uint64_t k = 0; k <= 9; ++k) EXPECT_DOUBLE_EQ(s.step(k), 1.0);
  EXPECT_DOUBLE_EQ(s.step(19), 2.0 / (0.2 * 20.0));
  for (std::uint64_t k = 0; k < 10000; ++k) EXPECT_LE(s.step(k + 1), s.step(k));
  // A step already below 2/μ keeps k₀ at 0.
  EXPECT_EQ(StepsizeSchedule::strongly_convex(100.0, 1.0).transition_index(), 0u);
}

TEST(Schedule, ConstantAndValidation) {
  const auto c = StepsizeSchedule::constant(0.3);
  EXPECT_DOUBLE_EQ(c.step(0), 0.3);
  EXPECT_DOUBLE_EQ(c.step(1000000), 0.3);
  EXPECT_THROW(StepsizeSchedule::polynomial(0.0), ValidationError);
  EXPECT_THROW(StepsizeSchedule::polynomial(1.0, 0.4), ValidationError);
  EXPECT_THROW(StepsizeSchedule::polynomial(1.0, 1.0), ValidationError);
  EXPECT_THROW(StepsizeSchedule::strongly_convex(1.0, 0.0), ValidationError);
  EXPECT_THROW(StepsizeSchedule::constant(-1.0), ValidationError);
  EXPECT_EQ(StepsizeSchedule::polynomial(1.0).with_alpha0(0.5).alpha0(), 0.5);
}

TEST(PrimalStep, InactiveConstraintGivesAPlainGradientStep) {
  const QcqpInstance ball = testing::single_constraint(Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
  const QcqpProblem p(ball, 1.0);
  const Vector x = vec({0.2, -0.1});
  const Vector next = primal_step(p, {1.0, 0.0}, x, DualVector(1), 0, 0.25);
  EXPECT_EQ(next, x - 0.25 * p.objective_gradient(x));
}

TEST(PrimalStep, TinyInstanceLandsOnTheOptimum) {
  const QcqpProblem p = tiny_problem();
  const Vector next = primal_step(p, {1.0, 0.0}, vec({0, 0}), DualVector(1), 0, 0.5);
  EXPECT_EQ(next, vec({0.5, 0.5}));
}

TEST(PrimalStep, VanishingStepKeepsThePoint) {
  const QcqpProblem p = tiny_problem();
  const Vector x = vec({0.3, 0.9});
  EXPECT_LE((primal_step(p, {1.0, 0.0}, x, DualVector(vec({1.0})), 0, 1e-300) - x).norm(), 1e-290);
}

TEST(PrimalStep, EvaluatesExactlyOneConstraintPair) {
  const QcqpProblem inner = small_generated(1);
  const testing::RecordingProblem p(inner);
  primal_step(p, {10.0, 0.01}, Vector::Zero(10), DualVector(10), 4, 0.1);
  ASSERT_EQ(p.pair_calls.size(), 1u);
  EXPECT_EQ(p.pair_calls[0].j, 4u);
  EXPECT_TRUE(p.value_calls.empty());
  EXPECT_TRUE(p.gradient_calls.empty());
}

TEST(PrimalStep, RejectsBadArguments) {
  const QcqpProblem p = tiny_problem();
  EXPECT_THROW(primal_step(p, {1.0, 0.0}, vec({0, 0}), DualVector(1), 1, 0.1), IndexError);
  EXPECT_THROW(primal_step(p, {1.0, 0.0}, vec({0, 0}), DualVector(1), 0, 0.0), ContractError);
}

TEST(DualStep, Examples) {
  const DualVector zero(3);
  EXPECT_EQ(dual_step({10.0, 0.1}, zero, 1, -0.5)[1], 0.0);
  const DualVector one(vec({1.0}));
  EXPECT_DOUBLE_EQ(dual_step({2.0, 0.0}, one, 0, 0.5)[0], 2.0);
  const PalParams p{3.0, 0.3};
  const DualVector lam(vec({0.7, 2.0}));
  const DualVector clamped = dual_step(p, lam, 1, -(1 - p.tau) * 2.0 / p.rho - 1e-9);
  EXPECT_EQ(clamped[1], 0.0);
  EXPECT_EQ(clamped[0], 0.7);
  EXPECT_EQ(dual_step(p, lam, 1, -(1 - p.tau) * 2.0 / p.rho)[1], 0.0);
  EXPECT_THROW(dual_step(p, lam, 2, 0.0), IndexError);
}

TEST(DualStep, MatchesTheMaxForm) {
  CounterRng rng(21);
  for (int t = 0; t < 1000; ++t) {
    const PalParams p{rng.uniform(0.1, 10.0), rng.uniform(0.0, 0.9)};
    const double lam = rng.uniform(0.0, 5.0);
    const double h = rng.uniform(-3.0, 3.0);
    const double expected = (1 - p.tau) * lam + p.rho * std::max(-(1 - p.tau) * lam / p.rho, h);
    const double got = dual_step(p, DualVector(vec({lam})), 0, h)[0];
    EXPECT_GE(got, 0.0);
    EXPECT_NEAR(got, expected, 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

SgdpaConfig basic_config(double alpha0, std::uint64_t seed = 0) {
  SgdpaConfig c;
  c.pal = {10.0, 0.01};
  c.schedule = StepsizeSchedule::polynomial(alpha0, 0.5);
  c.rng_seed = seed;
  return c;
}

TEST(SgdpaIterate, ComposesPrimalAndDualStepsWithIndependentDraws) {
  const QcqpProblem p = small_generated(2);
  const SgdpaConfig cfg = basic_config(0.05, 4);
  SolverState s = initial_state(p, cfg);
  for (int k = 0; k < 50; ++k) {
    CounterRng draws = s.rng;
    const std::size_t j = draws.uniform_index(10);
    const std::size_t jbar = draws.uniform_index(10);
    const double alpha = cfg.schedule.step(s.iter);
    const Vector x1 = primal_step(p, cfg.pal, s.x, s.lambda, j, alpha);
    const DualVector l1 = dual_step(cfg.pal, s.lambda, jbar, p.constraint_value(jbar, x1));
    const SolverState next = sgdpa_iterate(p, cfg, s);
    EXPECT_EQ(next.x, x1);
    EXPECT_EQ(next.lambda, l1);
    EXPECT_EQ(next.iter, s.iter + 1);
    EXPECT_EQ(next.rng, draws);
    s = next;
  }
}

TEST(SgdpaIterate, DualStepUsesTheNewIterate) {
  const QcqpProblem inner = small_generated(3);
  const testing::RecordingProblem p(inner);
  const SgdpaConfig cfg = basic_config(0.05, 1);
  SolverState s = initial_state(p, cfg);
  for (int k = 0; k < 20; ++k) {
    p.clear();
    s = sgdpa_iterate(p, cfg, s);
    ASSERT_EQ(p.pair_calls.size(), 1u);
    ASSERT_EQ(p.value_calls.size(), 1u);
    EXPECT_EQ(p.value_calls[0].x, s.x);
  }
}

TEST(SgdpaIterate, SameSeedGivesIdenticalStates) {
  const QcqpProblem p = small_generated(4);
  const SgdpaConfig cfg = basic_config(0.05, 9);
  SolverState a = initial_state(p, cfg);
  SolverState b = initial_state(p, cfg);
  for (int k = 0; k < 500; ++k) {
    a = sgdpa_iterate(p, cfg, a);
    b = sgdpa_iterate(p, cfg, b);
  }
  EXPECT_TRUE(a == b);
  SgdpaConfig other = cfg;
  other.rng_seed = 10;
  SolverState c = initial_state(p, other);
  for (int k = 0; k < 500; ++k) c = sgdpa_iterate(p, other, c);
  EXPECT_NE(c.x, a.x);
}

TEST(SgdpaIterate, SingleConstraintAlwaysSamplesIt) {
  const QcqpProblem inner = tiny_problem();
  const testing::RecordingProblem p(inner);
  const SgdpaConfig cfg = basic_config(0.05);
  SolverState s = initial_state(p, cfg);
  for (int k = 0; k < 100; ++k) s = sgdpa_iterate(p, cfg, s);
  for (const auto& c : p.pair_calls) EXPECT_EQ(c.j, 0u);
  for (const auto& c : p.value_calls) EXPECT_EQ(c.j, 0u);
  EXPECT_GE(s.lambda.min(), 0.0);
}

TEST(SgdpaIterate, SampledPairsAreIndependentAndUniform) {
  const QcqpProblem inner = small_generated(5);
  const testing::RecordingProblem p(inner);
  SgdpaConfig cfg = basic_config(1e-3, 77);
  SolverState s = initial_state(p, cfg);
  std::array<std::array<double, 10>, 10> counts{};
  const int iters = 100000;
  for (int k = 0; k < iters; ++k) {
    p.clear();
    sgdpa_advance(p, cfg, s);
    counts[p.pair_calls[0].j][p.value_calls[0].j] += 1.0;
  }
  const double expected = iters / 100.0;
  double chi2 = 0.0;
  for (const auto& row : counts)
    for (double c : row) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, kChiSquare99At0001);
}

TEST(SgdpaIterate, InvariantsHoldAlongARun) {
  const QcqpProblem p = small_generated(6, 20);
  SgdpaConfig cfg = basic_config(default_alpha0(p, {10.0, 0.01}));
  SolverState s = initial_state(p, cfg);
  const double bound = dual_bound(p.constants(), cfg.pal).value;
  for (int k = 0; k < 20000; ++k) {
    sgdpa_advance(p, cfg, s);
    ASSERT_GE(s.lambda.min(), -1e-12);
    ASSERT_LE(s.lambda.max(), bound + 1e-9);
    ASSERT_EQ(p.project(s.x), s.x);
  }
}

TEST(AveragedIterate, WeightedByStepsizes) {
  SolverState s;
  s.x = Vector::Zero(2);
  s.weighted_sum = Vector::Zero(2);
  EXPECT_THROW(averaged_iterate(s), ValidationError);

  // Two points with α₀ = 1, γ = ½: weights 1 and 1/√2.
  const QcqpInstance ball = testing::single_constraint(Matrix::Identity(2, 2), Vector::Zero(2), 100.0);
  const QcqpProblem p(ball, 1.0);
  SgdpaConfig cfg;
  cfg.pal = {1.0, 0.0};
  cfg.schedule = StepsizeSchedule::polynomial(1.0, 0.5);
  cfg.x0 = vec({1.0, 2.0});
  SolverState st = initial_state(p, cfg);
  sgdpa_advance(p, cfg, st);
  const Vector x1 = st.x;
  sgdpa_advance(p, cfg, st);
  const Vector x2 = st.x;
  const double w = 1.0 / std::sqrt(2.0);
  EXPECT_LE((averaged_iterate(st) - (x1 + w * x2) / (1.0 + w)).norm(), 1e-15);
}

TEST(AveragedIterate, ConstantSequenceAveragesToItself) {
  // x = 0 is a fixed point: ∇F(0) = 0 and the constraint is inactive.
  const QcqpInstance ball = testing::single_constraint(Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
  const QcqpProblem p(ball, 1.0);
  SgdpaConfig cfg = basic_config(0.1);
  SolverState s = initial_state(p, cfg);
  for (int k = 0; k < 10; ++k) sgdpa_advance(p, cfg, s);
  EXPECT_EQ(averaged_iterate(s), Vector::Zero(2));
}

TEST(AveragedIterate, GatedByTheAveragingStart) {
  const QcqpProblem p = tiny_problem();
  SgdpaConfig cfg;
  cfg.pal = {10.0, 0.0};
  cfg.schedule = StepsizeSchedule::strongly_convex(0.05, 1.0);
  const std::uint64_t k0 = cfg.schedule.transition_index();
  ASSERT_EQ(k0, 39u);
  SolverState s = initial_state(p, cfg);
  for (std::uint64_t k = 0; k <= k0; ++k) sgdpa_advance(p, cfg, s);
  EXPECT_EQ(s.weight_total, 0.0);
  Vector sum = Vector::Zero(2);
  for (int k = 0; k < 5; ++k) {
    sgdpa_advance(p, cfg, s);
    sum += s.x;
  }
  EXPECT_EQ(s.weight_total, 5.0);
  EXPECT_LE((averaged_iterate(s) - sum / 5.0).norm(), 1e-15);
}

TEST(Solve, TinyInstanceConverges) {
  const QcqpProblem p = tiny_problem();
  SgdpaConfig cfg = basic_config(default_alpha0(p, {10.0, 0.0}));
  cfg.pal = {10.0, 0.0};
  cfg.reference_objective = 0.25;
  const auto [report, trace] = solve(p, cfg);
  EXPECT_EQ(report.reason, StopReason::feasible_optimal);
  EXPECT_TRUE(report.converged);
  EXPECT_LE(*report.final_report.objective_gap, 1e-2);
  EXPECT_LE(report.final_report.feasibility_sq, 1e-2);
  EXPECT_LE(report.iterations, 100000u);
  EXPECT_EQ(trace.records.back().iter, report.iterations);
}

TEST(Solve, ZeroEpochBudgetReturnsImmediately) {
  const QcqpProblem p = tiny_problem();
  SgdpaConfig cfg = basic_config(0.1);
  cfg.stop.max_epochs = 0;
  const auto [report, trace] = solve(p, cfg);
  EXPECT_EQ(report.reason, StopReason::budget);
  EXPECT_EQ(report.iterations, 0u);
  EXPECT_FALSE(report.converged);
  ASSERT_EQ(trace.records.size(), 1u);
  EXPECT_EQ(trace.records[0].iter, 0u);
}

TEST(Solve, NeverStopsOnOptimalityWhileInfeasible) {
  // Start far outside the feasible region with a tiny step: the gap test can
  // pass early but feasibility does not.
  const QcqpProblem p = tiny_problem();
  SgdpaConfig cfg = basic_config(1e-6);
  cfg.pal = {10.0, 0.0};
  cfg.reference_objective = 0.0;
  cfg.stop.gap_tol = 10.0;
  cfg.max_iters = 2000;
  const auto [report, trace] = solve(p, cfg);
  EXPECT_EQ(report.reason, StopReason::budget);
  for (const auto& r : trace.records) EXPECT_GT(r.feasibility_sq, 1e-2);
}

TEST(Solve, TraceIsDeterministic) {
  const QcqpProblem p = small_generated(7);
  SgdpaConfig cfg = basic_config(0.02, 3);
  cfg.max_iters = 3000;
  cfg.trace.record_wall_time = false;
  cfg.trace.points_per_decade = 10;
  const auto a = solve(p, cfg).second;
  const auto b = solve(p, cfg).second;
  std::ostringstream sa, sb;
  write_trace_csv(sa, a);
  write_trace_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  for (std::size_t i = 1; i < a.records.size(); ++i) EXPECT_GT(a.records[i].iter, a.records[i - 1].iter);
}

TEST(Solve, StallStopWithoutReference) {
  const QcqpProblem p = tiny_problem();
  SgdpaConfig cfg = basic_config(1e-4);
  const auto [report, trace] = solve(p, cfg);
  EXPECT_EQ(report.reason, StopReason::stalled);
  EXPECT_EQ(report.iterations, 10u);
}

TEST(Solve, SinkSeesEveryRecord) {
  const QcqpProblem p = small_generated(8);
  SgdpaConfig cfg = basic_config(0.02);
  cfg.max_iters = 200;
  cfg.stop.stall_mode = StallMode::never;
  std::vector<TraceRecord> seen;
  cfg.sink = [&](const TraceRecord& r) { seen.push_back(r); };
  const auto trace = solve(p, cfg).second;
  ASSERT_EQ(seen.size(), trace.records.size());
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i].iter, trace.records[i].iter);
}

TEST(Solve, DivergenceNamesTheIteration) {
  const QcqpProblem p = small_generated(9);
  SgdpaConfig cfg = basic_config(1e200);
  cfg.pal = {10.0, 0.0};
  cfg.stop.stall_mode = StallMode::never;
  try {
    solve(p, cfg);
    FAIL() << "expected divergence";
  } catch (const DivergedError& e) {
    EXPECT_GE(e.iteration(), 1u);
  }
}

TEST(Config, ValidationRejectsBadSettings) {
  const QcqpProblem p = tiny_problem();
  SgdpaConfig c = basic_config(0.1);
  c.max_iters = 0;
  EXPECT_THROW(solve(p, c), ValidationError);
  c = basic_config(0.1);
  c.averaging_start = c.max_iters;
  EXPECT_THROW(solve(p, c), ValidationError);
  c = basic_config(0.1);
  c.stop.stall_tol = 0.0;
  EXPECT_THROW(solve(p, c), ValidationError);
  c = basic_config(0.1);
  c.x0 = vec({1, 2, 3});
  EXPECT_THROW(solve(p, c), DimensionError);
}

TEST(TraceCsv, RoundTrip) {
  Trace t;
  t.append({0, 0.0, 1.5, std::nullopt, 0.25, 0.5, 0.1, 0.0, 0.0});
  t.append({10, 1.0, 1.0 / 3.0, 0.125, 0.0, 0.0, 0.05, 2.0, 3.5});
  EXPECT_THROW(t.append({10, 1.0, 0, std::nullopt, 0, 0, 0, 0, 0}), ValidationError);
  std::ostringstream os;
  write_trace_csv(os, t);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), kTraceCsvHeader);
  std::istringstream is(os.str());
  const Trace back = read_trace_csv(is);
  ASSERT_EQ(back.records.size(), 2u);
  EXPECT_FALSE(back.records[0].gap.has_value());
  EXPECT_EQ(back.records[1].objective, 1.0 / 3.0);
  EXPECT_EQ(*back.records[1].gap, 0.125);
  std::ostringstream again;
  write_trace_csv(again, back);
  EXPECT_EQ(again.str(), os.str());
}

Trace power_law(double c, double exponent, std::uint64_t k_lo, std::uint64_t k_hi) {
  Trace t;
  for (double k = static_cast<double>(k_lo); k <= static_cast<double>(k_hi); k *= 1.2) {
    TraceRecord r;
    r.iter = static_cast<std::uint64_t>(std::llround(k));
    if (!t.records.empty() && r.iter <= t.records.back().iter) continue;
    r.gap = c * std::pow(static_cast<double>(r.iter), exponent);
    r.mean_violation = 2.0 * c * std::pow(static_cast<double>(r.iter), exponent);
    t.append(r);
  }
  return t;
}

TEST(RateSlope, ExactPowerLaws) {
  EXPECT_NEAR(rate_slope(power_law(1.0, -0.5, 1000, 100000), RateMetric::gap, 1000, 100000), -0.5, 1e-6);
  EXPECT_NEAR(rate_slope(power_law(7.0, -1.0, 1000, 100000), RateMetric::gap, 1000, 100000), -1.0, 1e-6);
  EXPECT_NEAR(rate_slope(power_law(7.0, -1.0, 1000, 100000), RateMetric::mean_violation, 1000, 100000),
              -1.0, 1e-6);
}

TEST(RateSlope, RejectsInsufficientOrNonpositiveData) {
  EXPECT_THROW(rate_slope(power_law(1.0, -0.5, 1000, 3000), RateMetric::gap, 1000, 3000), ValidationError);
  Trace t = power_law(1.0, -0.5, 1000, 100000);
  t.records[5].gap = 0.0;
  EXPECT_THROW(rate_slope(t, RateMetric::gap, 1000, 100000), ValidationError);
  Trace none = power_law(1.0, -0.5, 1000, 100000);
  for (auto& r : none.records) r.gap.reset();
  EXPECT_THROW(rate_slope(none, RateMetric::gap, 1000, 100000), ValidationError);
}

TEST(MedianTrace, PointwiseMedian) {
  std::vector<Trace> ts(3);
  const double vals[3] = {1.0, 5.0, 2.0};
  for (int i = 0; i < 3; ++i) {
    ts[i].append({1, 0.1, vals[i], vals[i], vals[i], vals[i], 0.1, 0, 0});
    ts[i].append({2, 0.2, -vals[i], vals[i] * 2, vals[i], vals[i], 0.1, 0, 0});
  }
  const Trace m = median_trace(ts);
  ASSERT_EQ(m.records.size(), 2u);
  EXPECT_EQ(*m.records[0].gap, 2.0);
  EXPECT_EQ(*m.records[1].gap, 4.0);
  EXPECT_EQ(m.records[1].objective, -2.0);
  ts[2].records[1].iter = 3;
  EXPECT_THROW(median_trace(ts), ValidationError);
}

TEST(Restarts, FirstTrialSuccessIsAPassthrough) {
  const QcqpProblem p = tiny_problem();
  SgdpaConfig cfg = basic_config(default_alpha0(p, {10.0, 0.0}));
  cfg.pal = {10.0, 0.0};
  cfg.reference_objective = 0.25;
  cfg.trace.record_wall_time = false;
  RestartOptions r;
  r.initial_budget = 100000;
  const auto [wrapped, wtrace] = solve_with_restarts(p, cfg, r);
  SgdpaConfig plain = cfg;
  plain.max_iters = 100000;
  const auto [direct, dtrace] = solve(p, plain);
  EXPECT_EQ(wrapped.restarts, 0);
  EXPECT_EQ(wrapped.iterations, direct.iterations);
  EXPECT_EQ(wrapped.x_hat, direct.x_hat);
  std::ostringstream a, b;
  write_trace_csv(a, wtrace);
  write_trace_csv(b, dtrace);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Restarts, GeometricBudgetsAndSteps) {
  // Unreachable reference: every trial fails and runs its full budget.
  const QcqpProblem p = tiny_problem();
  SgdpaConfig cfg = basic_config(0.01);
  cfg.pal = {10.0, 0.0};
  cfg.reference_objective = -100.0;
  cfg.trace.record_wall_time = false;
  RestartOptions r;
  r.initial_budget = 100;
  r.budget_growth = 2.0;
  r.step_shrink = 0.5;
  r.max_restarts = 2;
  const auto [report, trace] = solve_with_restarts(p, cfg, r);
  EXPECT_FALSE(report.converged);
  EXPECT_EQ(report.restarts, 2);
  ASSERT_EQ(trace.restart_starts.size(), 3u);

  std::vector<std::uint64_t> budgets;
  std::uint64_t previous_end = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    const std::size_t end = t + 1 < 3 ? trace.restart_starts[t + 1] : trace.records.size();
    const std::uint64_t last_iter = trace.records[end - 1].iter;
    budgets.push_back(last_iter - previous_end);
    previous_end = last_iter;
  }
  EXPECT_EQ(budgets, (std::vector<std::uint64_t>{100, 200, 400}));

  // First record of trial t ≥ 1 is its local iteration 1: α₀ᵗ/√2.
  EXPECT_DOUBLE_EQ(trace.records[trace.restart_starts[0]].stepsize, 0.01);
  EXPECT_DOUBLE_EQ(trace.records[trace.restart_starts[1]].stepsize, 0.005 / std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(trace.records[trace.restart_starts[2]].stepsize, 0.0025 / std::sqrt(2.0));
  EXPECT_EQ(report.iterations, 400u);
}

TEST(Restarts, OversizedStepRecoversWithinThreeRestarts) {
  const QcqpProblem p = tiny_problem();
  SgdpaConfig cfg = basic_config(1.0);
  cfg.pal = {10.0, 0.0};
  cfg.reference_objective = 0.25;
  RestartOptions r;
  r.alpha0_initial = 50.0 * default_alpha0(p, cfg.pal);
  r.max_restarts = 3;
  const auto [report, trace] = solve_with_restarts(p, cfg, r);
  EXPECT_TRUE(report.converged);
  EXPECT_LE(report.restarts, 3);
}

TEST(Restarts, OptionValidation) {
  RestartOptions r;
  r.budget_growth = 1.0;
  EXPECT_THROW(r.validate(), ValidationError);
  r = {};
  r.step_shrink = 1.0;
  EXPECT_THROW(r.validate(), ValidationError);
  r = {};
  r.initial_budget = 0;
  EXPECT_THROW(r.validate(), ValidationError);
}

TEST(DefaultAlpha0, UsesTheMultiplierBoundInForce) {
  const QcqpProblem p = small_generated(10);
  const auto& c = p.constants();
  const std::size_t m = p.num_constraints();
  EXPECT_DOUBLE_EQ(default_alpha0(p, {10.0, 0.0}), 2.0 / smoothness_constant(c, {10.0, 0.0}, 0.0, m));
  const double l1 = static_cast<double>(m) * 10.0 * c.M_h / 0.01;
  EXPECT_DOUBLE_EQ(default_alpha0(p, {10.0, 0.01}), 2.0 / smoothness_constant(c, {10.0, 0.01}, l1, m));
  const double assumed = std::sqrt(static_cast<double>(m)) * 3.0;
  EXPECT_DOUBLE_EQ(default_alpha0(p, {10.0, 0.01}, 3.0),
                   2.0 / smoothness_constant(c, {10.0, 0.01}, assumed, m));
}

}  // namespace
}  // namespace sgdpa
