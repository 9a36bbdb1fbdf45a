#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "sgdpa/errors.hpp"
#include "sgdpa/mpc.hpp"
#include "test_util.hpp"

namespace sgdpa {
namespace {

using testing::vec;

LtiModel scalar_model(double a, double b, std::size_t N) {
  LtiModel m;
  m.A = Matrix::Constant(1, 1, a);
  m.B = Matrix::Constant(1, 1, b);
  m.Q = Matrix::Identity(1, 1);
  m.R = Matrix::Identity(1, 1);
  m.horizon = N;
  return m;
}

EllipsoidSequence unit_ball(Eigen::Index nx) { return {{{Matrix::Identity(nx, nx), Vector::Zero(nx)}}}; }

TEST(Condense, ScalarTwoStepRecursion) {
  const CondensedQcqp c = condense(scalar_model(1.0, 1.0, 2), unit_ball(1), vec({0.0}));
  ASSERT_EQ(c.A_k.size(), 2u);
  EXPECT_EQ(c.A_k[0](0, 0), 1.0);
  EXPECT_EQ(c.A_k[1](0, 0), 1.0);
  EXPECT_EQ(c.B_k[0], (Matrix(1, 2) << 1, 0).finished());
  EXPECT_EQ(c.B_k[1], (Matrix(1, 2) << 1, 1).finished());
}

TEST(Condense, ZeroDynamicsKeepOnlyTheLatestInput) {
  LtiModel m;
  m.A = Matrix::Zero(2, 2);
  m.B = (Matrix(2, 1) << 1, 2).finished();
  m.Q = Matrix::Identity(2, 2);
  m.R = Matrix::Identity(1, 1);
  m.horizon = 4;
  const CondensedQcqp c = condense(m, unit_ball(2), vec({1, 1}));
  for (std::size_t k = 1; k <= 4; ++k) {
    EXPECT_EQ(c.A_k[k - 1], Matrix::Zero(2, 2));
    Matrix expected = Matrix::Zero(2, 4);
    expected.col(static_cast<Eigen::Index>(k) - 1) = m.B;
    EXPECT_EQ(c.B_k[k - 1], expected);
  }
}

TEST(Condense, CenteredEllipsoidsAreStrictlyFeasibleAtZeroInput) {
  // x₀ = c and A = I keep every prediction at the center when u = 0.
  LtiModel m;
  m.A = Matrix::Identity(2, 2);
  m.B = Matrix::Identity(2, 2);
  m.Q = Matrix::Identity(2, 2);
  m.R = Matrix::Identity(2, 2);
  m.horizon = 3;
  const Vector c = vec({0.4, -1.2});
  const EllipsoidSequence e{{{Matrix::Identity(2, 2) * 3.0, c}}};
  const CondensedQcqp q = condense(m, e, c);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(qcqp_constraint(q.instance, k, Vector::Zero(6)), -1.0, 1e-15);
  EXPECT_EQ(q.instance.num_constraints(), 3u);
}

TEST(Condense, BlockCountAndBoxTiling) {
  LtiModel m = scalar_model(0.9, 0.5, 5);
  m.input_set = SimpleSet::box(vec({-2}), vec({3}));
  const CondensedQcqp c = condense(m, unit_ball(1), vec({1.0}));
  for (std::size_t k = 1; k <= 5; ++k) {
    int nonzero = 0;
    for (Eigen::Index i = 0; i < 5; ++i) nonzero += c.B_k[k - 1](0, i) != 0.0;
    EXPECT_EQ(nonzero, static_cast<int>(k));
  }
  EXPECT_EQ(c.instance.simple_set.lower(), Vector::Constant(5, -2.0));
  EXPECT_EQ(c.instance.simple_set.upper(), Vector::Constant(5, 3.0));
}

struct RandomSystem {
  LtiModel model;
  EllipsoidSequence ellipsoids;
  Vector x0;
  Vector u;
};

RandomSystem random_system(CounterRng& rng) {
  RandomSystem s;
  const auto nx = static_cast<Eigen::Index>(1 + rng.uniform_index(4));
  const auto nu = static_cast<Eigen::Index>(1 + rng.uniform_index(4));
  const std::size_t N = 1 + rng.uniform_index(8);
  s.model.A = Matrix(nx, nx);
  for (Eigen::Index i = 0; i < nx; ++i)
    for (Eigen::Index j = 0; j < nx; ++j) s.model.A(i, j) = rng.normal() / std::sqrt(static_cast<double>(nx));
  s.model.B = Matrix(nx, nu);
  for (Eigen::Index i = 0; i < nx; ++i)
    for (Eigen::Index j = 0; j < nu; ++j) s.model.B(i, j) = rng.normal();
  s.model.Q = testing::random_psd_matrix(rng, nx);
  s.model.R = testing::random_psd_matrix(rng, nu);
  s.model.horizon = N;
  for (std::size_t k = 0; k < N; ++k)
    s.ellipsoids.stages.push_back({testing::random_psd_matrix(rng, nx), testing::random_normal(rng, nx)});
  s.x0 = testing::random_normal(rng, nx);
  s.u = testing::random_normal(rng, nu * static_cast<Eigen::Index>(N));
  return s;
}

TEST(Condense, MatchesStepByStepSimulation) {
  CounterRng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const RandomSystem s = random_system(rng);
    const CondensedQcqp c = condense(s.model, s.ellipsoids, s.x0);
    const auto nu = static_cast<Eigen::Index>(s.model.nu());
    Vector x = s.x0;
    double cost = 0.0;
    for (std::size_t k = 0; k < s.model.horizon; ++k) {
      const Vector uk = s.u.segment(static_cast<Eigen::Index>(k) * nu, nu);
      cost += 0.5 * x.dot(s.model.Q * x) + 0.5 * uk.dot(s.model.R * uk);
      x = s.model.A * x + s.model.B * uk;
      const Vector pred = c.predict(k + 1, s.u);
      EXPECT_LE((pred - x).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, x.cwiseAbs().maxCoeff()));
      const Ellipsoid& e = s.ellipsoids.stages[k];
      const double direct = (x - e.c).dot(e.P * (x - e.c)) - 1.0;
      EXPECT_NEAR(qcqp_constraint(c.instance, k, s.u), direct, 1e-9 * std::max(1.0, std::abs(direct)));
    }
    cost += 0.5 * x.dot(s.model.Q * x);
    EXPECT_NEAR(c.horizon_cost(s.u), cost, 1e-9 * std::max(1.0, std::abs(cost)));
  }
}

TEST(Condense, RejectsInconsistentInputs) {
  LtiModel m = scalar_model(1.0, 1.0, 2);
  EXPECT_THROW(condense(m, unit_ball(1), vec({0, 0})), DimensionError);
  EXPECT_THROW(condense(m, unit_ball(2), vec({0})), DimensionError);
  m.R(0, 0) = -1.0;
  EXPECT_THROW(condense(m, unit_ball(1), vec({0})), InvalidInstanceError);
  m = scalar_model(1.0, 1.0, 0);
  EXPECT_THROW(condense(m, unit_ball(1), vec({0})), ValidationError);
  EllipsoidSequence two{{{Matrix::Identity(1, 1), vec({0})}, {Matrix::Identity(1, 1), vec({0})}}};
  EXPECT_THROW(condense(scalar_model(1.0, 1.0, 3), two, vec({0})), DimensionError);
}

TEST(EllipsoidSequence, BroadcastAndIndexing) {
  const EllipsoidSequence one = unit_ball(2);
  EXPECT_EQ(&one.at(1), &one.at(7));
  EXPECT_THROW(one.at(0), IndexError);
  EllipsoidSequence two{{{Matrix::Identity(1, 1), vec({0})}, {Matrix::Identity(1, 1) * 2, vec({1})}}};
  EXPECT_EQ(two.at(2).c, vec({1}));
  EXPECT_THROW(two.at(3), IndexError);
}

TEST(RecedingHorizon, StableSystemDecaysWithoutConstraintActivity) {
  LtiModel m = scalar_model(0.5, 1.0, 3);
  m.R = Matrix::Identity(1, 1) * 1e3;
  m.input_set = SimpleSet::box(vec({-1}), vec({1}));
  const EllipsoidSequence e{{{Matrix::Identity(1, 1) / 100.0, vec({0})}}};
  MpcSolverOptions opt;
  opt.base.pal = {10.0, 0.0};
  opt.base.max_iters = 2000;
  const ClosedLoopTrace t = receding_horizon(m, e, vec({1.0}), 10, opt);
  ASSERT_EQ(t.steps.size(), 10u);
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    EXPECT_EQ(t.steps[i].report.feasibility_sq, 0.0);
    EXPECT_LE(std::abs(t.steps[i].u(0)), 1e-2);
    if (i > 0) {
      EXPECT_LT(std::abs(t.steps[i].x(0)), std::abs(t.steps[i - 1].x(0)));
    }
  }
  EXPECT_LT(std::abs(t.x_final(0)), 0.01);
}

TEST(RecedingHorizon, DoubleIntegratorReachesTheOrigin) {
  const MpcScenario sc = double_integrator_scenario();
  MpcSolverOptions opt;
  opt.base.pal = {10.0, 0.01};
  opt.base.max_iters = 20000;
  const ClosedLoopTrace t = receding_horizon(sc.model, sc.ellipsoids, sc.x0, sc.n_steps, opt);
  EXPECT_LE(t.x_final.norm(), 0.1);
  for (const auto& s : t.steps) {
    EXPECT_LE(s.report.feasibility_sq, 1e-2);
    EXPECT_LE(std::abs(s.u(0)), 1.0);
  }
}

TEST(RecedingHorizon, StrictModeAbortsOnUnconvergedSolves) {
  const MpcScenario sc = double_integrator_scenario();
  MpcSolverOptions opt;
  opt.base.max_iters = 3;
  opt.base.stop.stall_mode = StallMode::never;
  opt.strict = true;
  EXPECT_THROW(receding_horizon(sc.model, sc.ellipsoids, sc.x0, 2, opt), Error);
  opt.strict = false;
  const ClosedLoopTrace t = receding_horizon(sc.model, sc.ellipsoids, sc.x0, 2, opt);
  EXPECT_FALSE(t.steps[0].converged);
  EXPECT_EQ(t.steps[0].reason, StopReason::budget);
}

TEST(ClosedLoopTrace, CsvLayout) {
  const MpcScenario sc = double_integrator_scenario();
  MpcSolverOptions opt;
  const ClosedLoopTrace t = receding_horizon(sc.model, sc.ellipsoids, sc.x0, 3, opt);
  std::ostringstream os;
  t.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,x0,x1,u0,solve_iters,feasibility_sq");
  int rows = 0;
  std::string last;
  while (std::getline(is, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, 4);
  EXPECT_EQ(last.substr(0, 2), "3,");
  EXPECT_EQ(last.substr(last.size() - 3), ",,,");
}

TEST(Scenario, JsonRoundTrip) {
  MpcScenario sc = double_integrator_scenario();
  sc.model.input_set = SimpleSet::box(vec({-1}), vec({std::numeric_limits<double>::infinity()}));
  const std::string text = scenario_to_json(sc);
  const MpcScenario back = scenario_from_json(text);
  EXPECT_EQ(back.model.A, sc.model.A);
  EXPECT_EQ(back.model.B, sc.model.B);
  EXPECT_EQ(back.model.Q, sc.model.Q);
  EXPECT_EQ(back.model.R, sc.model.R);
  EXPECT_EQ(back.model.horizon, sc.model.horizon);
  EXPECT_TRUE(back.model.input_set == sc.model.input_set);
  EXPECT_EQ(back.ellipsoids.stages[0].P, sc.ellipsoids.stages[0].P);
  EXPECT_EQ(back.x0, sc.x0);
  EXPECT_EQ(back.n_steps, sc.n_steps);
  EXPECT_EQ(scenario_to_json(back), text);
  EXPECT_THROW(scenario_from_json(R"({"A": [[1]]})"), ValidationError);
  EXPECT_THROW(scenario_from_json("not json"), ValidationError);
}

}  // namespace
}  // namespace sgdpa
