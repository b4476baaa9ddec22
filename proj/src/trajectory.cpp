#include "hierctl/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "hierctl/errors.hpp"

namespace hierctl {

QuinticTrajectory::QuinticTrajectory(Eigen::Vector2d start, Eigen::Vector2d goal, double duration)
    : start_(std::move(start)), goal_(std::move(goal)), duration_(duration) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw InputError("trajectory duration must be positive");
  }
  const double t3 = duration * duration * duration;
  coefficients_ = {0.0, 0.0, 0.0, 10.0 / t3, -15.0 / (t3 * duration), 6.0 / (t3 * duration * duration)};
}

Eigen::Vector2d QuinticTrajectory::position(double t) const {
  const double tc = std::clamp(t, 0.0, duration_);
  const auto& c = coefficients_;
  const double s = ((c[5] * tc + c[4]) * tc + c[3]) * tc * tc * tc;
  return start_ + s * (goal_ - start_);
}

Eigen::Vector2d QuinticTrajectory::velocity(double t) const {
  if (t <= 0.0 || t >= duration_) {
    return Eigen::Vector2d::Zero();
  }
  const auto& c = coefficients_;
  const double sd = ((5.0 * c[5] * t + 4.0 * c[4]) * t + 3.0 * c[3]) * t * t;
  return sd * (goal_ - start_);
}

Eigen::Vector2d QuinticTrajectory::acceleration(double t) const {
  if (t <= 0.0 || t >= duration_) {
    return Eigen::Vector2d::Zero();
  }
  const auto& c = coefficients_;
  const double sdd = ((20.0 * c[5] * t + 12.0 * c[4]) * t + 6.0 * c[3]) * t;
  return sdd * (goal_ - start_);
}

Pt1Filter::Pt1Filter(Vector initial, double time_constant, double dt) : state_(std::move(initial)) {
  if (!(time_constant > 0.0) || !(dt > 0.0)) {
    throw InputError("PT1 time constant and step must be positive");
  }
  factor_ = dt / time_constant;
}

const Vector& Pt1Filter::update(const Vector& input) {
  if (input.size() != state_.size()) {
    throw InputError("PT1 input size changed");
  }
  state_ += factor_ * (input - state_);
  return state_;
}

std::vector<Vector> output_filter_pt1(std::span<const Vector> signal, double time_constant, double dt,
                                      const Vector& initial) {
  Pt1Filter filter(initial, time_constant, dt);
  std::vector<Vector> out;
  out.reserve(signal.size());
  for (const Vector& u : signal) {
    out.push_back(filter.update(u));
  }
  return out;
}

}  // namespace hierctl
