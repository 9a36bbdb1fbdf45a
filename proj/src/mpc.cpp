#include "sgdpa/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <ostream>

#include "sgdpa/errors.hpp"
#include "sgdpa/qcqp_io.hpp"

namespace sgdpa {

namespace {

void check_psd(const Matrix& M, const std::string& name) {
  if (!is_symmetric(M)) throw InvalidInstanceError(name + " is not symmetric");
  if (M.size() > 0 && symmetric_eigenvalue_range(M).min < -1e-10)
    throw InvalidInstanceError(name + " is not positive semidefinite");
}

}  // namespace

void LtiModel::validate() const {
  const auto n = A.rows();
  if (n < 1 || A.cols() != n) throw DimensionError("A must be square and nonempty");
  if (B.rows() != n || B.cols() < 1) throw DimensionError("B must have nx rows");
  if (Q.rows() != n || Q.cols() != n) throw DimensionError("Q must be nx by nx");
  if (R.rows() != B.cols() || R.cols() != B.cols()) throw DimensionError("R must be nu by nu");
  if (horizon < 1) throw ValidationError("horizon must be at least 1");
  if (!A.allFinite() || !B.allFinite()) throw ValidationError("A and B must be finite");
  check_psd(Q, "Q");
  check_psd(R, "R");
  input_set.check_dimension(nu());
}

const Ellipsoid& EllipsoidSequence::at(std::size_t k) const {
  if (stages.empty()) throw ValidationError("empty ellipsoid sequence");
  if (k < 1) throw IndexError("ellipsoid stage index starts at 1");
  if (stages.size() == 1) return stages.front();
  if (k > stages.size()) throw IndexError("ellipsoid stage index out of range");
  return stages[k - 1];
}

void EllipsoidSequence::validate(std::size_t nx, std::size_t horizon) const {
  if (stages.size() != 1 && stages.size() != horizon)
    throw DimensionError("need one ellipsoid or one per stage");
  const auto n = static_cast<Eigen::Index>(nx);
  for (const auto& e : stages) {
    if (e.P.rows() != n || e.P.cols() != n || e.c.size() != n)
      throw DimensionError("ellipsoid dimension mismatch");
    check_psd(e.P, "P");
  }
}

Vector CondensedQcqp::predict(std::size_t k, const Vector& u) const {
  if (k == 0) return x0;
  if (k > A_k.size()) throw IndexError("prediction step beyond the horizon");
  if (u.size() != B_k[k - 1].cols()) throw DimensionError("input vector has the wrong length");
  return A_k[k - 1] * x0 + B_k[k - 1] * u;
}

double CondensedQcqp::horizon_cost(const Vector& u) const {
  return qcqp_objective(instance, u) + objective_offset;
}

CondensedQcqp condense(const LtiModel& model, const EllipsoidSequence& ellipsoids,
                       const Vector& x0) {
  model.validate();
  const std::size_t N = model.horizon;
  ellipsoids.validate(model.nx(), N);
  const auto nx = static_cast<Eigen::Index>(model.nx());
  const auto nu = static_cast<Eigen::Index>(model.nu());
  const auto nU = nu * static_cast<Eigen::Index>(N);
  if (x0.size() != nx) throw DimensionError("x0 has the wrong dimension");

  CondensedQcqp out;
  out.x0 = x0;
  Matrix Ak = Matrix::Identity(nx, nx);
  Matrix Bk = Matrix::Zero(nx, nU);
  for (std::size_t k = 1; k <= N; ++k) {
    // B_k = A·B_{k−1} with B placed in block k−1.
    Bk = (model.A * Bk).eval();
    Bk.middleCols((static_cast<Eigen::Index>(k) - 1) * nu, nu) = model.B;
    Ak = (model.A * Ak).eval();
    out.A_k.push_back(Ak);
    out.B_k.push_back(Bk);
  }

  QcqpInstance& inst = out.instance;
  inst.Q_f = Matrix::Zero(nU, nU);
  inst.q_f = Vector::Zero(nU);
  out.objective_offset = 0.5 * x0.dot(model.Q * x0);
  for (std::size_t k = 0; k < N; ++k) {
    const Matrix QB = model.Q * out.B_k[k];
    const Vector ax = out.A_k[k] * x0;
    inst.Q_f.noalias() += out.B_k[k].transpose() * QB;
    inst.q_f.noalias() += QB.transpose() * ax;
    out.objective_offset += 0.5 * ax.dot(model.Q * ax);
    inst.Q_f.block(static_cast<Eigen::Index>(k) * nu, static_cast<Eigen::Index>(k) * nu, nu, nu) +=
        model.R;
  }
  inst.Q_f = 0.5 * (inst.Q_f + inst.Q_f.transpose()).eval();

  for (std::size_t k = 1; k <= N; ++k) {
    const Ellipsoid& e = ellipsoids.at(k);
    const Matrix& B = out.B_k[k - 1];
    const Vector d = out.A_k[k - 1] * x0 - e.c;
    QuadraticConstraint c;
    c.Q = 2.0 * B.transpose() * e.P * B;
    c.Q = 0.5 * (c.Q + c.Q.transpose()).eval();
    c.q = 2.0 * B.transpose() * (e.P * d);
    c.b = 1.0 - d.dot(e.P * d);
    inst.constraints.push_back(std::move(c));
  }

  const auto& U = model.input_set;
  switch (U.kind()) {
    case SimpleSet::Kind::box:
      inst.simple_set = SimpleSet::box(U.lower().replicate(static_cast<Eigen::Index>(N), 1),
                                       U.upper().replicate(static_cast<Eigen::Index>(N), 1));
      break;
    case SimpleSet::Kind::nonnegative_orthant:
      inst.simple_set = SimpleSet::nonnegative_orthant();
      break;
    case SimpleSet::Kind::full_space:
      inst.simple_set = SimpleSet::full_space();
      break;
  }
  inst.validate();
  return out;
}

void ClosedLoopTrace::write_csv(std::ostream& out) const {
  const Eigen::Index nx = x_final.size();
  const Eigen::Index nu = steps.empty() ? 0 : steps.front().u.size();
  out << 't';
  for (Eigen::Index i = 0; i < nx; ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < nu; ++i) out << ",u" << i;
  out << ",solve_iters,feasibility_sq\n";
  for (const auto& s : steps) {
    out << s.t;
    for (Eigen::Index i = 0; i < nx; ++i) out << ',' << format_real(s.x(i));
    for (Eigen::Index i = 0; i < nu; ++i) out << ',' << format_real(s.u(i));
    out << ',' << s.solve_iters << ',' << format_real(s.report.feasibility_sq) << '\n';
  }
  out << steps.size();
  for (Eigen::Index i = 0; i < nx; ++i) out << ',' << format_real(x_final(i));
  for (Eigen::Index i = 0; i < nu; ++i) out << ',';
  out << ",,\n";
}

namespace {

Vector shift_blocks(const Vector& v, Eigen::Index block) {
  const Eigen::Index n = v.size();
  Vector out(n);
  out.head(n - block) = v.tail(n - block);
  out.tail(block) = v.tail(block);
  return out;
}

}  // namespace

ClosedLoopTrace receding_horizon(const LtiModel& model, const EllipsoidSequence& ellipsoids,
                                 const Vector& x0, std::size_t n_steps,
                                 const MpcSolverOptions& options) {
  if (n_steps < 1) throw ValidationError("n_steps must be at least 1");
  const auto nu = static_cast<Eigen::Index>(model.nu());
  ClosedLoopTrace trace;
  Vector x = x0;
  std::optional<Vector> warm_u;
  std::optional<DualVector> warm_lambda;

  for (std::size_t t = 0; t < n_steps; ++t) {
    const CondensedQcqp cq = condense(model, ellipsoids, x);
    const auto radius = cq.instance.simple_set.radius();
    const QcqpProblem problem(cq.instance, radius ? std::max(*radius, 1e-12)
                                                  : default_certificate_radius(x));
    SgdpaConfig cfg = options.base;
    cfg.schedule = cfg.schedule.with_alpha0(
        options.alpha0 ? *options.alpha0 : default_alpha0(problem, cfg.pal, cfg.assumed_dual_bound));
    cfg.x0.reset();
    cfg.lambda0.reset();
    if (options.warm_start && warm_u) {
      cfg.x0 = shift_blocks(*warm_u, nu);
      cfg.lambda0 = DualVector(shift_blocks(warm_lambda->values(), 1));
    }
    auto [report, solve_trace] = solve(problem, cfg);
    const Vector& u = cfg.stop.evaluate_on == MetricPoint::averaged ? report.x_hat : report.x_last;

    ClosedLoopStep step;
    step.t = t;
    step.x = x;
    step.u = u.head(nu);
    step.solve_iters = report.iterations;
    step.report = optimality_report(problem, u);
    step.reason = report.reason;
    step.converged = report.converged;
    if (options.strict && !step.converged)
      throw Error("inner solve unconverged at closed-loop step " + std::to_string(t));
    trace.steps.push_back(step);

    warm_u = u;
    warm_lambda = report.lambda_last;
    x = model.A * x + model.B * step.u;
    if (!x.allFinite()) throw DivergedError(t + 1, "closed-loop state is not finite");
  }
  trace.x_final = x;
  return trace;
}

namespace {

using nlohmann::json;

Matrix matrix_from(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw ValidationError(name + " must be a nonempty list of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) throw ValidationError(name + " must be a list of rows");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw DimensionError(name + " has ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return M;
}

Vector vector_from(const json& j, const std::string& name) {
  if (!j.is_array()) throw ValidationError(name + " must be a list");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (e.is_string()) {
      const auto s = e.get<std::string>();
      if (s == "inf") v(static_cast<Eigen::Index>(i)) = std::numeric_limits<double>::infinity();
      else if (s == "-inf") v(static_cast<Eigen::Index>(i)) = -std::numeric_limits<double>::infinity();
      else throw ValidationError(name + " has a non-numeric entry");
    } else {
      v(static_cast<Eigen::Index>(i)) = e.get<double>();
    }
  }
  return v;
}

std::string real_list(const Vector& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    const double x = v(i);
    if (std::isinf(x)) s += x > 0 ? "\"inf\"" : "\"-inf\"";
    else s += format_real(x);
  }
  return s + "]";
}

std::string rows_list(const Matrix& M) {
  std::string s = "[";
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    if (r) s += ", ";
    s += real_list(M.row(r).transpose());
  }
  return s + "]";
}

}  // namespace

MpcScenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
  MpcScenario s;
  try {
    s.model.A = matrix_from(j.at("A"), "A");
    s.model.B = matrix_from(j.at("B"), "B");
    s.model.Q = matrix_from(j.at("Q"), "Q");
    s.model.R = matrix_from(j.at("R"), "R");
    s.model.horizon = j.at("N").get<std::size_t>();
    if (j.contains("input_box")) {
      const auto& box = j.at("input_box");
      s.model.input_set = SimpleSet::box(vector_from(box.at("lower"), "input_box.lower"),
                                         vector_from(box.at("upper"), "input_box.upper"));
    }
    for (const auto& e : j.at("ellipsoids"))
      s.ellipsoids.stages.push_back({matrix_from(e.at("P"), "P"), vector_from(e.at("c"), "c")});
    s.x0 = vector_from(j.at("x0"), "x0");
    s.n_steps = j.value("n_steps", std::size_t{1});
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
  s.model.validate();
  s.ellipsoids.validate(s.model.nx(), s.model.horizon);
  if (s.x0.size() != s.model.A.rows()) throw DimensionError("x0 has the wrong dimension");
  return s;
}

std::string scenario_to_json(const MpcScenario& s) {
  std::string out = "{\n";
  out += "  \"A\": " + rows_list(s.model.A) + ",\n";
  out += "  \"B\": " + rows_list(s.model.B) + ",\n";
  out += "  \"Q\": " + rows_list(s.model.Q) + ",\n";
  out += "  \"R\": " + rows_list(s.model.R) + ",\n";
  out += "  \"N\": " + std::to_string(s.model.horizon) + ",\n";
  if (s.model.input_set.kind() == SimpleSet::Kind::box)
    out += "  \"input_box\": {\"lower\": " + real_list(s.model.input_set.lower()) +
           ", \"upper\": " + real_list(s.model.input_set.upper()) + "},\n";
  out += "  \"ellipsoids\": [";
  for (std::size_t i = 0; i < s.ellipsoids.stages.size(); ++i) {
    if (i) out += ", ";
    out += "{\"P\": " + rows_list(s.ellipsoids.stages[i].P) +
           ", \"c\": " + real_list(s.ellipsoids.stages[i].c) + "}";
  }
  out += "],\n";
  out += "  \"x0\": " + real_list(s.x0) + ",\n";
  out += "  \"n_steps\": " + std::to_string(s.n_steps) + "\n}\n";
  return out;
}

MpcScenario read_scenario(const std::filesystem::path& path) {
  return scenario_from_json(read_text_file(path));
}

MpcScenario double_integrator_scenario() {
  const double dt = 0.2;
  MpcScenario s;
  s.model.A.resize(2, 2);
  s.model.A << 1.0, dt, 0.0, 1.0;
  s.model.B.resize(2, 1);
  s.model.B << 0.5 * dt * dt, dt;
  s.model.Q = Matrix::Identity(2, 2);
  s.model.R = Matrix::Constant(1, 1, 0.1);
  s.model.input_set = SimpleSet::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
  s.model.horizon = 10;
  s.ellipsoids.stages.push_back({Matrix::Identity(2, 2) / 25.0, Vector::Zero(2)});
  s.x0 = Vector(2);
  s.x0 << 1.0, 0.0;
  s.n_steps = 40;
  return s;
}

}  // namespace sgdpa
