#include "sgdpa/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "sgdpa/errors.hpp"

namespace sgdpa {

StepsizeSchedule::StepsizeSchedule(Kind kind, double alpha0, double gamma, double mu)
    : kind_(kind), alpha0_(alpha0), gamma_(gamma), mu_(mu) {
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) throw ValidationError("alpha0 must be positive");
}

StepsizeSchedule StepsizeSchedule::polynomial(double alpha0, double gamma) {
  if (!(gamma >= 0.5 && gamma < 1.0)) throw ValidationError("gamma must lie in [1/2, 1)");
  return {Kind::polynomial, alpha0, gamma, 0.0};
}

StepsizeSchedule StepsizeSchedule::strongly_convex(double alpha0, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ValidationError("mu must be positive");
  return {Kind::strongly_convex, alpha0, 0.0, mu};
}

StepsizeSchedule StepsizeSchedule::constant(double alpha) { return {Kind::constant, alpha, 0.0, 0.0}; }

double StepsizeSchedule::step(std::uint64_t k) const {
  const double kp1 = static_cast<double>(k) + 1.0;
  switch (kind_) {
    case Kind::polynomial:
      return gamma_ == 0.5 ? alpha0_ / std::sqrt(kp1) : alpha0_ / std::pow(kp1, gamma_);
    case Kind::strongly_convex:
      return std::min(alpha0_, 2.0 / (mu_ * kp1));
    case Kind::constant:
      return alpha0_;
  }
  return alpha0_;
}

StepsizeSchedule StepsizeSchedule::with_alpha0(double alpha0) const {
  return {kind_, alpha0, gamma_, mu_};
}

std::uint64_t StepsizeSchedule::transition_index() const {
  if (kind_ != Kind::strongly_convex) return 0;
  const double k0 = std::floor(2.0 / (mu_ * alpha0_) - 1.0);
  if (!(k0 > 0.0)) return 0;
  if (k0 > 1e18) return static_cast<std::uint64_t>(1e18);
  return static_cast<std::uint64_t>(k0);
}

std::uint64_t StepsizeSchedule::default_averaging_start() const {
  return kind_ == Kind::strongly_convex ? transition_index() + 1 : 0;
}

std::string to_string(StepsizeSchedule::Kind kind) {
  switch (kind) {
    case StepsizeSchedule::Kind::polynomial:
      return "polynomial";
    case StepsizeSchedule::Kind::strongly_convex:
      return "strongly_convex";
    case StepsizeSchedule::Kind::constant:
      return "constant";
  }
  return "unknown";
}

}  // namespace sgdpa
