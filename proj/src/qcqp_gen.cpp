#include "sgdpa/qcqp_gen.hpp"

#include <Eigen/QR>
#include <json.hpp>
#include <numeric>
#include <vector>

#include "sgdpa/errors.hpp"

namespace sgdpa {

namespace {

template <class E>
E enum_from(const std::string& name, std::initializer_list<E> values) {
  for (E v : values)
    if (to_string(v) == name) return v;
  throw ValidationError("unknown generator option '" + name + "'");
}

double draw_linear(GenSpec::LinearSupport support, CounterRng& rng) {
  switch (support) {
    case GenSpec::LinearSupport::positive:
      return rng.uniform01();
    case GenSpec::LinearSupport::negative:
      return -rng.uniform01();
    case GenSpec::LinearSupport::symmetric:
      return rng.uniform(-1.0, 1.0);
  }
  return 0.0;
}

/// YᵀDY with ⌊n/10⌋ zero diagonal entries (when `zeros`), the rest U(0,1).
Matrix random_psd(std::size_t n, bool zeros, CounterRng& rng) {
  const Matrix Y = random_orthogonal(n, rng);
  Vector d(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = rng.uniform01();
  if (zeros) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t nz = n / 10;
    // Partial Fisher-Yates: the first nz slots are a uniform subset.
    for (std::size_t i = 0; i < nz; ++i) {
      const std::size_t r = i + rng.uniform_index(n - i);
      std::swap(idx[i], idx[r]);
      d(static_cast<Eigen::Index>(idx[i])) = 0.0;
    }
  }
  Matrix Q = Y.transpose() * d.asDiagonal() * Y;
  return 0.5 * (Q + Q.transpose());
}

}  // namespace

void GenSpec::validate() const {
  if (n < 1 || m < 1) throw ValidationError("n and m must be positive");
  if (objective_kind == ObjectiveKind::convex && n < 10)
    throw ValidationError("the convex objective needs n >= 10");
}

std::string to_string(GenSpec::ObjectiveKind kind) {
  return kind == GenSpec::ObjectiveKind::convex ? "convex" : "strongly_convex";
}

std::string to_string(GenSpec::BScenario scenario) {
  return scenario == GenSpec::BScenario::feasible_point_offset ? "feasible_point_offset"
                                                               : "uniform_random";
}

std::string to_string(GenSpec::LinearSupport support) {
  switch (support) {
    case GenSpec::LinearSupport::positive:
      return "positive";
    case GenSpec::LinearSupport::negative:
      return "negative";
    case GenSpec::LinearSupport::symmetric:
      return "symmetric";
  }
  return "unknown";
}

std::string GenSpec::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["m"] = m;
  j["objective_kind"] = to_string(objective_kind);
  j["b_scenario"] = to_string(b_scenario);
  j["objective_linear"] = to_string(objective_linear);
  j["constraint_linear"] = "positive";
  j["seed"] = seed;
  return j.dump();
}

GenSpec GenSpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed generator spec: ") + e.what());
  }
  GenSpec s;
  try {
    s.n = j.at("n").get<std::size_t>();
    s.m = j.at("m").get<std::size_t>();
    if (j.contains("objective_kind"))
      s.objective_kind = enum_from(j.at("objective_kind").get<std::string>(),
                                   {ObjectiveKind::convex, ObjectiveKind::strongly_convex});
    if (j.contains("b_scenario"))
      s.b_scenario = enum_from(j.at("b_scenario").get<std::string>(),
                               {BScenario::feasible_point_offset, BScenario::uniform_random});
    if (j.contains("objective_linear"))
      s.objective_linear = enum_from(
          j.at("objective_linear").get<std::string>(),
          {LinearSupport::positive, LinearSupport::negative, LinearSupport::symmetric});
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed generator spec: ") + e.what());
  }
  s.validate();
  return s;
}

Matrix random_orthogonal(std::size_t n, CounterRng& rng) {
  if (n < 1) throw ValidationError("n must be positive");
  const auto N = static_cast<Eigen::Index>(n);
  Matrix G(N, N);
  for (Eigen::Index c = 0; c < N; ++c)
    for (Eigen::Index r = 0; r < N; ++r) G(r, c) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ();
  const Matrix& R = qr.matrixQR();
  for (Eigen::Index i = 0; i < N; ++i)
    if (R(i, i) < 0.0) Q.col(i) = -Q.col(i);
  return Q;
}

QcqpInstance generate(const GenSpec& spec) {
  spec.validate();
  const CounterRng root(spec.seed);
  const auto n = static_cast<Eigen::Index>(spec.n);
  QcqpInstance inst;

  CounterRng obj = root.substream(0);
  inst.Q_f = random_psd(spec.n, spec.objective_kind == GenSpec::ObjectiveKind::convex, obj);
  inst.q_f.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) inst.q_f(i) = draw_linear(spec.objective_linear, obj);

  inst.constraints.resize(spec.m);
  for (std::size_t i = 0; i < spec.m; ++i) {
    CounterRng r = root.substream(i + 1);
    auto& c = inst.constraints[i];
    c.Q = random_psd(spec.n, true, r);
    c.q.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) c.q(k) = r.uniform01();
  }

  CounterRng rb = root.substream(spec.m + 1);
  if (spec.b_scenario == GenSpec::BScenario::feasible_point_offset) {
    Vector x0(n);
    for (Eigen::Index k = 0; k < n; ++k) x0(k) = rb.uniform01();
    for (auto& c : inst.constraints) c.b = 0.5 * x0.dot(c.Q * x0) + c.q.dot(x0) + 0.1;
    inst.start_point = x0;
  } else {
    for (auto& c : inst.constraints) c.b = rb.uniform01();
  }
  inst.simple_set = SimpleSet::nonnegative_orthant();
  inst.provenance_json = spec.to_json();
  return inst;
}

TinyInstance tiny_analytic_instance(double tau) {
  if (!(tau >= 0.0 && tau < 1.0)) throw ValidationError("tau must lie in [0, 1)");
  TinyInstance t;
  t.instance.Q_f = Matrix::Identity(2, 2);
  t.instance.q_f = Vector::Zero(2);
  QuadraticConstraint c;
  c.Q = Matrix::Zero(2, 2);
  c.q = Vector::Constant(2, -1.0);
  c.b = -1.0;
  t.instance.constraints.push_back(c);
  t.instance.simple_set = SimpleSet::nonnegative_orthant();
  t.x_star = Vector::Constant(2, 0.5);
  t.f_star = 0.25;
  t.lambda_star = 0.5 / (1.0 - tau);
  return t;
}

}  // namespace sgdpa
