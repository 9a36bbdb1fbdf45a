#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sgdpa/linalg.hpp"

namespace sgdpa {

/// Bounds used by the step-size rules and the dual bound:
///   ‖∇F(x)‖ ≤ B_F, |h_j(x)| ≤ M_h, ‖∇h_j(x)‖ ≤ B_h on the region the
/// iterates live in, plus the Lipschitz constants of ∇F and ∇h_j and the
/// strong-convexity modulus of F (0 when F is merely convex).
struct ProblemConstants {
  double L_f = 0.0;
  double L_h = 0.0;
  double B_F = 0.0;
  double M_h = 0.0;
  double B_h = 0.0;
  double mu = 0.0;

  /// Throws ValidationError unless every field is finite and nonnegative.
  void validate() const;
};

/// The simple set Y onto which primal iterates are projected.
class SimpleSet {
 public:
  enum class Kind { nonnegative_orthant, box, full_space };

  static SimpleSet nonnegative_orthant();
  static SimpleSet full_space();
  /// Infinite bounds are allowed; lower ≤ upper componentwise is required.
  static SimpleSet box(Vector lower, Vector upper);

  Kind kind() const noexcept { return kind_; }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }

  /// Euclidean projection of v onto the set.
  Vector project(const Vector& v) const;
  bool contains(const Vector& v, double tol = 0.0) const;

  /// Throws DimensionError when a box set does not have dimension n.
  void check_dimension(std::size_t n) const;

  /// Largest norm of a point in the set, or nullopt if unbounded.
  std::optional<double> radius() const;

  friend bool operator==(const SimpleSet& a, const SimpleSet& b);

 private:
  SimpleSet(Kind kind, Vector lower, Vector upper);

  Kind kind_;
  Vector lower_;
  Vector upper_;
};

std::string to_string(SimpleSet::Kind kind);

Vector project_simple(const SimpleSet& set, const Vector& v);

/// Oracle interface for  min F(x)  s.t.  h_j(x) ≤ 0, j = 0..m-1,  x ∈ Y.
///
/// Constraint indices are 0-based. Implementations are immutable after
/// construction, so a single problem may be shared by concurrent solves.
class ConstrainedProblem {
 public:
  virtual ~ConstrainedProblem() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::size_t num_constraints() const = 0;

  virtual double objective_value(const Vector& x) const = 0;
  virtual Vector objective_gradient(const Vector& x) const = 0;
  virtual double constraint_value(std::size_t j, const Vector& x) const = 0;
  virtual Vector constraint_gradient(std::size_t j, const Vector& x) const = 0;

  /// Value and gradient of h_j in one call. The default implementation calls
  /// the two oracles separately; implementations may share work.
  virtual double constraint_value_and_gradient(std::size_t j, const Vector& x,
                                               Vector& gradient) const;

  /// All constraint values h(x).
  virtual Vector constraint_values(const Vector& x) const;

  virtual Vector project(const Vector& v) const = 0;
  virtual const ProblemConstants& constants() const = 0;

 protected:
  void check_index(std::size_t j) const;
  void check_point(const Vector& x) const;
};

struct QuadraticConstraint {
  Matrix Q;
  Vector q;
  double b = 0.0;
};

/// Dense QCQP:  min ½xᵀQ_f x + q_fᵀx  s.t.  ½xᵀQ_i x + q_iᵀx − b_i ≤ 0,  x ∈ Y.
struct QcqpInstance {
  Matrix Q_f;
  Vector q_f;
  std::vector<QuadraticConstraint> constraints;
  SimpleSet simple_set = SimpleSet::nonnegative_orthant();

  /// Optional provenance, carried through the file format untouched.
  std::optional<Vector> start_point;
  std::string provenance_json;

  std::size_t dimension() const { return static_cast<std::size_t>(q_f.size()); }
  std::size_t num_constraints() const { return constraints.size(); }

  /// Checks n, m ≥ 1, consistent sizes, finite entries and symmetric Q's.
  void validate() const;
};

double qcqp_objective(const QcqpInstance& instance, const Vector& x);
Vector qcqp_objective_gradient(const QcqpInstance& instance, const Vector& x);
double qcqp_constraint(const QcqpInstance& instance, std::size_t j, const Vector& x);
Vector qcqp_constraint_gradient(const QcqpInstance& instance, std::size_t j, const Vector& x);

/// Certifies the bounds of ProblemConstants over the ball ‖x‖ ≤ radius from
/// the extremal eigenvalues of the data. Throws InvalidInstanceError when a
/// Q matrix has an eigenvalue below −1e-10.
ProblemConstants qcqp_constants(const QcqpInstance& instance, double radius);

/// Default certification radius around a start point: 10·‖x0‖ + 10.
double default_certificate_radius(const Vector& x0);

/// ConstrainedProblem backed by a QcqpInstance.
class QcqpProblem final : public ConstrainedProblem {
 public:
  /// Constants are certified over the ball of the given radius.
  QcqpProblem(QcqpInstance instance, double radius);
  QcqpProblem(QcqpInstance instance, ProblemConstants constants);

  std::size_t dimension() const override { return instance_.dimension(); }
  std::size_t num_constraints() const override { return instance_.num_constraints(); }

  double objective_value(const Vector& x) const override;
  Vector objective_gradient(const Vector& x) const override;
  double constraint_value(std::size_t j, const Vector& x) const override;
  Vector constraint_gradient(std::size_t j, const Vector& x) const override;
  double constraint_value_and_gradient(std::size_t j, const Vector& x,
                                       Vector& gradient) const override;
  Vector constraint_values(const Vector& x) const override;
  Vector project(const Vector& v) const override;
  const ProblemConstants& constants() const override { return constants_; }

  const QcqpInstance& instance() const noexcept { return instance_; }

 private:
  QcqpInstance instance_;
  ProblemConstants constants_;
};

struct OptimalityReport {
  double objective = 0.0;
  /// |F(x) − F*|, present only when a reference value was supplied.
  std::optional<double> objective_gap;
  /// ‖max(0, h(x))‖².
  double feasibility_sq = 0.0;
  /// (1/m) Σ_j max(0, h_j(x)).
  double mean_violation = 0.0;
};

OptimalityReport optimality_report(const ConstrainedProblem& problem, const Vector& x,
                                   std::optional<double> f_star = std::nullopt);

}  // namespace sgdpa
