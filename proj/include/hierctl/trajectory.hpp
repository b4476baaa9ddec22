#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hierctl/linalg.hpp"

namespace hierctl {

// Straight-line point-to-point motion with the quintic time scaling
// s(u) = 10u^3 - 15u^4 + 6u^5, u = t / T. Velocity and acceleration vanish
// at both ends; the profile is held constant outside [0, T].
class QuinticTrajectory {
 public:
  QuinticTrajectory(Eigen::Vector2d start, Eigen::Vector2d goal, double duration);

  const Eigen::Vector2d& start() const { return start_; }
  const Eigen::Vector2d& goal() const { return goal_; }
  double duration() const { return duration_; }
  // Coefficients of s(t) in powers of t, constant term first.
  const std::array<double, 6>& coefficients() const { return coefficients_; }

  Eigen::Vector2d position(double t) const;
  Eigen::Vector2d velocity(double t) const;
  Eigen::Vector2d acceleration(double t) const;

 private:
  Eigen::Vector2d start_;
  Eigen::Vector2d goal_;
  double duration_;
  std::array<double, 6> coefficients_{};
};

// First-order low-pass y_{k+1} = y_k + (dt / tau) (u_k - y_k).
class Pt1Filter {
 public:
  Pt1Filter(Vector initial, double time_constant, double dt);
  const Vector& update(const Vector& input);
  const Vector& value() const { return state_; }

 private:
  Vector state_;
  double factor_;
};

// Output after each input sample; y_0 = initial.
std::vector<Vector> output_filter_pt1(std::span<const Vector> signal, double time_constant, double dt,
                                      const Vector& initial);

}  // namespace hierctl
