#pragma once

#include <cstdint>
#include <string>

namespace sgdpa {

/// Step-size rules α_k, k = 0, 1, 2, ...
///
///  * polynomial:       α_k = α₀ / (k+1)^γ,        γ ∈ [1/2, 1)
///  * strongly_convex:  α_k = min(α₀, 2/(μ(k+1)))
///  * constant:         α_k = α₀  (deterministic baselines)
class StepsizeSchedule {
 public:
  enum class Kind { polynomial, strongly_convex, constant };

  static StepsizeSchedule polynomial(double alpha0, double gamma = 0.5);
  static StepsizeSchedule strongly_convex(double alpha0, double mu);
  static StepsizeSchedule constant(double alpha);

  Kind kind() const noexcept { return kind_; }
  double alpha0() const noexcept { return alpha0_; }
  double gamma() const noexcept { return gamma_; }
  double mu() const noexcept { return mu_; }

  double step(std::uint64_t k) const;

  /// A copy with a different initial step (used by restarts).
  StepsizeSchedule with_alpha0(double alpha0) const;

  /// Last index of the constant phase of the strongly convex rule,
  /// k₀ = max(0, ⌊2/(μα₀) − 1⌋); 0 for the other kinds.
  std::uint64_t transition_index() const;

  /// First iteration that enters the running average: k₀ + 1 for the
  /// strongly convex rule (uniform weights), 0 otherwise (weights α_t).
  std::uint64_t default_averaging_start() const;
  bool uniform_averaging() const noexcept { return kind_ == Kind::strongly_convex; }

  friend bool operator==(const StepsizeSchedule&, const StepsizeSchedule&) = default;

 private:
  StepsizeSchedule(Kind kind, double alpha0, double gamma, double mu);

  Kind kind_;
  double alpha0_;
  double gamma_;
  double mu_;
};

std::string to_string(StepsizeSchedule::Kind kind);

}  // namespace sgdpa
