#include "hierctl/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hierctl/errors.hpp"

namespace hierctl {
namespace {

constexpr double kGoalReached = 1e-9;
constexpr double kGradientStep = 1e-6;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double motion_distance(const Eigen::Vector2d& x, const WorldModel& world, const TaskParams& params) {
  return std::min((x - world.start).norm() + params.start_creep, (world.goal - x).norm());
}

}  // namespace

void TaskParams::validate() const {
  for (double v : {xdot_max, d_break, jla_threshold, coll_activation, mnp_low, mnp_high, kappa}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InputError("task parameters must be strictly positive");
    }
  }
  if (!(mnp_low < mnp_high)) {
    throw InputError("mnp_low must be below mnp_high");
  }
  if (!(start_creep >= 0.0)) {
    throw InputError("start_creep must be non-negative");
  }
}

double scaling_gamma(double distance, double d_break) {
  if (distance >= d_break) {
    return 1.0;
  }
  return 0.5 * (1.0 - std::cos(std::numbers::pi * std::max(distance, 0.0) / d_break));
}

TaskOutput motion_task(const ChainParams& chain, const Vector& q, const WorldModel& world,
                       const TaskParams& params) {
  TaskOutput out;
  out.jacobian = jacobian(chain, q);
  out.importance = 1.0;
  const Eigen::Vector2d x = forward_kinematics(chain, q);
  const Eigen::Vector2d to_goal = world.goal - x;
  const double dist = to_goal.norm();
  if (dist < kGoalReached) {
    out.target = Vector::Zero(2);
    return out;
  }
  const double gamma = scaling_gamma(motion_distance(x, world, params), params.d_break);
  out.target = gamma * params.xdot_max * to_goal / dist;
  return out;
}

TaskOutput joint_limit_task(const Vector& q, const TaskParams& params,
                            std::span<const JointLimit> limits) {
  const Eigen::Index n = q.size();
  if (static_cast<std::size_t>(n) != limits.size()) {
    throw InputError("joint limit count does not match q");
  }
  TaskOutput out;
  out.jacobian = Matrix::Zero(n, n);
  out.target = Vector::Zero(n);
  double eta = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const JointLimit lim = limits[static_cast<std::size_t>(i)];
    const double to_lower = q(i) - lim.lower;
    const double to_upper = lim.upper - q(i);
    const bool near_lower = to_lower <= to_upper;
    const double d = near_lower ? to_lower : to_upper;
    if (d >= params.jla_threshold) {
      continue;
    }
    const double ramp = clamp01(1.0 - d / params.jla_threshold);
    out.jacobian(i, i) = 1.0;
    out.target(i) = (near_lower ? 1.0 : -1.0) * params.xdot_max * ramp;
    eta = std::max(eta, ramp);
  }
  out.importance = eta;
  return out;
}

std::optional<ClosestObstacle> closest_obstacle(const ChainParams& chain, const Vector& q,
                                                const WorldModel& world) {
  if (world.obstacles.empty()) {
    return std::nullopt;
  }
  const auto joints = joint_positions(chain, q);
  ClosestObstacle best{std::numeric_limits<double>::infinity(), {}, {}, {}};
  for (std::size_t link = 0; link < chain.dof(); ++link) {
    const Eigen::Vector2d a = joints[link];
    const Eigen::Vector2d ab = joints[link + 1] - a;
    for (const Circle& c : world.obstacles) {
      const double t = std::clamp((c.center - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
      const Eigen::Vector2d p = a + t * ab;
      const Eigen::Vector2d away = p - c.center;
      const double center_dist = away.norm();
      const double d = center_dist - c.radius;
      if (d < best.distance) {
        best.distance = d;
        best.point = {link, t};
        best.position = p;
        best.direction = center_dist > 1e-12 ? Eigen::Vector2d(away / center_dist)
                                             : Eigen::Vector2d(1.0, 0.0);
      }
    }
  }
  return best;
}

TaskOutput collision_task(const ChainParams& chain, const Vector& q, const WorldModel& world,
                          const TaskParams& params) {
  TaskOutput out;
  const auto closest = closest_obstacle(chain, q, world);
  if (!closest) {
    out.jacobian = Matrix::Zero(2, q.size());
    out.target = Vector::Zero(2);
    out.importance = 0.0;
    return out;
  }
  out.jacobian = jacobian(chain, q, closest->point);
  const double eta = clamp01(1.0 - closest->distance / params.coll_activation);
  out.importance = eta;
  out.target = params.xdot_max * eta * closest->direction;
  return out;
}

double manipulability(const ChainParams& chain, const Vector& q) {
  const Matrix j = jacobian(chain, q);
  const double det = (j * j.transpose()).determinant();
  return std::sqrt(std::max(det, 0.0));
}

Vector manipulability_gradient(const ChainParams& chain, const Vector& q) {
  Vector grad(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    Vector plus = q;
    Vector minus = q;
    plus(i) += kGradientStep;
    minus(i) -= kGradientStep;
    grad(i) = (manipulability(chain, plus) - manipulability(chain, minus)) / (2.0 * kGradientStep);
  }
  return grad;
}

TaskOutput manipulability_task(const ChainParams& chain, const Vector& q, const TaskParams& params) {
  TaskOutput out;
  const Eigen::Index n = q.size();
  out.jacobian = Matrix::Identity(n, n);
  out.target = manipulability_gradient(chain, q);
  const double l = manipulability(chain, q);
  out.importance = clamp01((params.mnp_high - l) / (params.mnp_high - params.mnp_low));
  return out;
}

TaskOutput comfort_task(const Vector& q, const WorldModel& world, const TaskParams& params,
                        double importance) {
  if (world.comfort_config.size() != q.size()) {
    throw InputError("comfort configuration does not match q");
  }
  if (!(importance >= 0.0 && importance <= 1.0)) {
    throw InputError("importance must lie in [0, 1]");
  }
  TaskOutput out;
  out.jacobian = Matrix::Identity(q.size(), q.size());
  out.target = params.kappa * (world.comfort_config - q);
  out.importance = importance;
  return out;
}

double comfort_cost(const Vector& q, const Vector& comfort, double kappa) {
  return 0.5 * kappa * (comfort - q).squaredNorm();
}

StackEvaluation evaluate_task_stack(const ChainParams& chain, const Vector& q,
                                    const WorldModel& world, const TaskParams& params) {
  StackEvaluation out;
  const Eigen::Vector2d x = forward_kinematics(chain, q);
  out.gamma = scaling_gamma(motion_distance(x, world, params), params.d_break);
  out.closest = closest_obstacle(chain, q, world);

  out.tasks[index_of(StackTask::kCollision)] = collision_task(chain, q, world, params);
  out.tasks[index_of(StackTask::kJointLimits)] = joint_limit_task(q, params, chain.joint_limits);
  out.tasks[index_of(StackTask::kMotion)] = motion_task(chain, q, world, params);
  out.tasks[index_of(StackTask::kManipulability)] = manipulability_task(chain, q, params);

  for (StackTask t : {StackTask::kCollision, StackTask::kJointLimits, StackTask::kManipulability}) {
    out.tasks[index_of(t)].target *= out.gamma;
  }
  return out;
}

}  // namespace hierctl
