#include "sgdpa/problem.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "sgdpa/errors.hpp"

namespace sgdpa {

EigenvalueRange symmetric_eigenvalue_range(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("eigenvalues of a non-square matrix");
  if (a.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw InvalidInstanceError("eigenvalue solver failed");
  const auto& ev = solver.eigenvalues();  // ascending
  return {ev(0), ev(ev.size() - 1)};
}

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool all_finite(const Vector& v) { return v.allFinite(); }

void ProblemConstants::validate() const {
  for (double c : {L_f, L_h, B_F, M_h, B_h, mu}) {
    if (!std::isfinite(c) || c < 0.0) {
      throw ValidationError("problem constants must be finite and nonnegative");
    }
  }
}

// --- SimpleSet -------------------------------------------------------------

SimpleSet::SimpleSet(Kind kind, Vector lower, Vector upper)
    : kind_(kind), lower_(std::move(lower)), upper_(std::move(upper)) {}

SimpleSet SimpleSet::nonnegative_orthant() { return {Kind::nonnegative_orthant, {}, {}}; }

SimpleSet SimpleSet::full_space() { return {Kind::full_space, {}, {}}; }

SimpleSet SimpleSet::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) throw DimensionError("box bounds differ in length");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower(i)) || std::isnan(upper(i)) || lower(i) > upper(i)) {
      throw ValidationError("box requires lower <= upper componentwise");
    }
  }
  return {Kind::box, std::move(lower), std::move(upper)};
}

Vector SimpleSet::project(const Vector& v) const {
  switch (kind_) {
    case Kind::nonnegative_orthant:
      return v.cwiseMax(0.0);
    case Kind::box:
      if (v.size() != lower_.size()) throw DimensionError("projection onto box of other dimension");
      return v.cwiseMax(lower_).cwiseMin(upper_);
    case Kind::full_space:
      return v;
  }
  return v;
}

bool SimpleSet::contains(const Vector& v, double tol) const {
  switch (kind_) {
    case Kind::nonnegative_orthant:
      return v.size() == 0 || v.minCoeff() >= -tol;
    case Kind::box:
      if (v.size() != lower_.size()) return false;
      return ((v - lower_).array() >= -tol).all() && ((upper_ - v).array() >= -tol).all();
    case Kind::full_space:
      return true;
  }
  return false;
}

void SimpleSet::check_dimension(std::size_t n) const {
  if (kind_ == Kind::box && static_cast<std::size_t>(lower_.size()) != n) {
    throw DimensionError("box dimension " + std::to_string(lower_.size()) + " != " +
                         std::to_string(n));
  }
}

std::optional<double> SimpleSet::radius() const {
  if (kind_ != Kind::box) return std::nullopt;
  const Vector extent = lower_.cwiseAbs().cwiseMax(upper_.cwiseAbs());
  if (!extent.allFinite()) return std::nullopt;
  return extent.norm();
}

bool operator==(const SimpleSet& a, const SimpleSet& b) {
  if (a.kind_ != b.kind_) return false;
  if (a.kind_ != SimpleSet::Kind::box) return true;
  return a.lower_.size() == b.lower_.size() && a.lower_ == b.lower_ && a.upper_ == b.upper_;
}

std::string to_string(SimpleSet::Kind kind) {
  switch (kind) {
    case SimpleSet::Kind::nonnegative_orthant:
      return "nonnegative_orthant";
    case SimpleSet::Kind::box:
      return "box";
    case SimpleSet::Kind::full_space:
      return "full_space";
  }
  return "unknown";
}

Vector project_simple(const SimpleSet& set, const Vector& v) { return set.project(v); }

// --- ConstrainedProblem ----------------------------------------------------

double ConstrainedProblem::constraint_value_and_gradient(std::size_t j, const Vector& x,
                                                         Vector& gradient) const {
  gradient = constraint_gradient(j, x);
  return constraint_value(j, x);
}

Vector ConstrainedProblem::constraint_values(const Vector& x) const {
  Vector h(static_cast<Eigen::Index>(num_constraints()));
  for (std::size_t j = 0; j < num_constraints(); ++j) h(static_cast<Eigen::Index>(j)) = constraint_value(j, x);
  return h;
}

void ConstrainedProblem::check_index(std::size_t j) const {
  if (j >= num_constraints()) {
    throw IndexError("constraint index " + std::to_string(j) + " out of range [0, " +
                     std::to_string(num_constraints()) + ")");
  }
}

void ConstrainedProblem::check_point(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dimension()) {
    throw DimensionError("point has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(dimension()));
  }
}

// --- QCQP ------------------------------------------------------------------

namespace {

void check_square(const Matrix& Q, Eigen::Index n, const std::string& name) {
  if (Q.rows() != n || Q.cols() != n) {
    throw DimensionError(name + " must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (!Q.allFinite()) throw ValidationError(name + " has non-finite entries");
  if (!is_symmetric(Q)) throw InvalidInstanceError(name + " is not symmetric");
}

void check_len(const Vector& v, Eigen::Index n, const std::string& name) {
  if (v.size() != n) {
    throw DimensionError(name + " has length " + std::to_string(v.size()) + ", expected " +
                         std::to_string(n));
  }
}

const QuadraticConstraint& constraint_at(const QcqpInstance& instance, std::size_t j) {
  if (j >= instance.num_constraints()) {
    throw IndexError("constraint index " + std::to_string(j) + " out of range [0, " +
                     std::to_string(instance.num_constraints()) + ")");
  }
  return instance.constraints[j];
}

constexpr double kPsdTolerance = -1e-10;

}  // namespace

void QcqpInstance::validate() const {
  const Eigen::Index n = q_f.size();
  if (n < 1) throw ValidationError("QCQP needs n >= 1");
  if (constraints.empty()) throw ValidationError("QCQP needs m >= 1");
  if (!q_f.allFinite()) throw ValidationError("q_f has non-finite entries");
  check_square(Q_f, n, "Q_f");
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    const std::string name = "constraint " + std::to_string(i);
    check_square(c.Q, n, name + " Q");
    check_len(c.q, n, name + " q");
    if (!c.q.allFinite() || !std::isfinite(c.b)) throw ValidationError(name + " has non-finite data");
  }
  simple_set.check_dimension(static_cast<std::size_t>(n));
  if (start_point) check_len(*start_point, n, "start_point");
}

double qcqp_objective(const QcqpInstance& instance, const Vector& x) {
  check_len(x, instance.q_f.size(), "x");
  return 0.5 * x.dot(instance.Q_f * x) + instance.q_f.dot(x);
}

Vector qcqp_objective_gradient(const QcqpInstance& instance, const Vector& x) {
  check_len(x, instance.q_f.size(), "x");
  return instance.Q_f * x + instance.q_f;
}

double qcqp_constraint(const QcqpInstance& instance, std::size_t j, const Vector& x) {
  const auto& c = constraint_at(instance, j);
  check_len(x, instance.q_f.size(), "x");
  return 0.5 * x.dot(c.Q * x) + c.q.dot(x) - c.b;
}

Vector qcqp_constraint_gradient(const QcqpInstance& instance, std::size_t j, const Vector& x) {
  const auto& c = constraint_at(instance, j);
  check_len(x, instance.q_f.size(), "x");
  return c.Q * x + c.q;
}

ProblemConstants qcqp_constants(const QcqpInstance& instance, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ValidationError("certification radius must be positive and finite");
  }
  instance.validate();

  const auto objective_range = symmetric_eigenvalue_range(instance.Q_f);
  if (objective_range.min < kPsdTolerance) {
    throw InvalidInstanceError("Q_f is not positive semidefinite (lambda_min = " +
                               std::to_string(objective_range.min) + ")");
  }

  ProblemConstants c;
  c.L_f = std::max(0.0, objective_range.max);
  c.mu = std::max(0.0, objective_range.min);
  c.B_F = c.L_f * radius + instance.q_f.norm();

  for (std::size_t i = 0; i < instance.constraints.size(); ++i) {
    const auto& con = instance.constraints[i];
    const auto range = symmetric_eigenvalue_range(con.Q);
    if (range.min < kPsdTolerance) {
      throw InvalidInstanceError("constraint " + std::to_string(i) +
                                 " matrix is not positive semidefinite");
    }
    const double lmax = std::max(0.0, range.max);
    const double qnorm = con.q.norm();
    c.L_h = std::max(c.L_h, lmax);
    c.B_h = std::max(c.B_h, lmax * radius + qnorm);
    c.M_h = std::max(c.M_h, 0.5 * lmax * radius * radius + qnorm * radius + std::abs(con.b));
  }
  return c;
}

double default_certificate_radius(const Vector& x0) { return 10.0 * x0.norm() + 10.0; }

QcqpProblem::QcqpProblem(QcqpInstance instance, double radius)
    : instance_(std::move(instance)), constants_(qcqp_constants(instance_, radius)) {}

QcqpProblem::QcqpProblem(QcqpInstance instance, ProblemConstants constants)
    : instance_(std::move(instance)), constants_(constants) {
  instance_.validate();
  constants_.validate();
}

double QcqpProblem::objective_value(const Vector& x) const {
  check_point(x);
  return 0.5 * x.dot(instance_.Q_f * x) + instance_.q_f.dot(x);
}

Vector QcqpProblem::objective_gradient(const Vector& x) const {
  check_point(x);
  return instance_.Q_f * x + instance_.q_f;
}

double QcqpProblem::constraint_value(std::size_t j, const Vector& x) const {
  check_index(j);
  check_point(x);
  const auto& c = instance_.constraints[j];
  return 0.5 * x.dot(c.Q * x) + c.q.dot(x) - c.b;
}

Vector QcqpProblem::constraint_gradient(std::size_t j, const Vector& x) const {
  check_index(j);
  check_point(x);
  const auto& c = instance_.constraints[j];
  return c.Q * x + c.q;
}

double QcqpProblem::constraint_value_and_gradient(std::size_t j, const Vector& x,
                                                  Vector& gradient) const {
  check_index(j);
  check_point(x);
  const auto& c = instance_.constraints[j];
  gradient.noalias() = c.Q * x;
  const double value = 0.5 * x.dot(gradient) + c.q.dot(x) - c.b;
  gradient += c.q;
  return value;
}

Vector QcqpProblem::constraint_values(const Vector& x) const {
  check_point(x);
  Vector h(static_cast<Eigen::Index>(num_constraints()));
  for (std::size_t j = 0; j < num_constraints(); ++j) {
    const auto& c = instance_.constraints[j];
    h(static_cast<Eigen::Index>(j)) = 0.5 * x.dot(c.Q * x) + c.q.dot(x) - c.b;
  }
  return h;
}

Vector QcqpProblem::project(const Vector& v) const {
  check_point(v);
  return instance_.simple_set.project(v);
}

OptimalityReport optimality_report(const ConstrainedProblem& problem, const Vector& x,
                                   std::optional<double> f_star) {
  OptimalityReport report;
  report.objective = problem.objective_value(x);
  if (f_star) report.objective_gap = std::abs(report.objective - *f_star);
  const Vector violation = problem.constraint_values(x).cwiseMax(0.0);
  report.feasibility_sq = violation.squaredNorm();
  report.mean_violation = violation.sum() / static_cast<double>(problem.num_constraints());
  return report;
}

}  // namespace sgdpa
