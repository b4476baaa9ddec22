#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "hierctl/linalg.hpp"
#include "hierctl/robot_model.hpp"

namespace hierctl {

// One evaluated task: q, qd -> (J, u, eta).
struct TaskOutput {
  Matrix jacobian;
  Vector target;
  double importance = 0.0;  // eta in [0, 1]
};

struct Circle {
  Eigen::Vector2d center;
  double radius;
};

struct WorldModel {
  Eigen::Vector2d start{0.0, 0.0};  // task-space start of the current motion
  Eigen::Vector2d goal{0.0, 0.0};
  std::vector<Circle> obstacles;
  Vector comfort_config;
};

struct TaskParams {
  double xdot_max = 0.2;          // m/s
  double d_break = 0.1;           // m
  double jla_threshold = 0.2;     // rad
  double coll_activation = 0.3;   // m
  double mnp_low = 0.04;          // eta_mnp = 1 at and below
  double mnp_high = 0.08;         // eta_mnp = 0 at and above
  double kappa = 0.1;             // comfort gain
  // Added to the distance travelled from the start so the motion can leave
  // its rest position.
  double start_creep = 0.01;      // m

  void validate() const;
};

// Row order of the four-task stack and of the priority matrix.
enum class StackTask : std::size_t { kCollision = 0, kJointLimits = 1, kMotion = 2, kManipulability = 3 };
inline constexpr std::size_t kStackSize = 4;

constexpr std::size_t index_of(StackTask t) { return static_cast<std::size_t>(t); }

// 0.5 (1 - cos(pi d / d_break)) inside the braking distance, 1 outside.
double scaling_gamma(double distance, double d_break);

TaskOutput motion_task(const ChainParams& chain, const Vector& q, const WorldModel& world,
                       const TaskParams& params);

TaskOutput joint_limit_task(const Vector& q, const TaskParams& params,
                            std::span<const JointLimit> limits);

struct ClosestObstacle {
  double distance;            // signed, negative inside the obstacle
  BodyPoint point;            // closest point on the chain
  Eigen::Vector2d position;   // of that point
  Eigen::Vector2d direction;  // unit, from obstacle towards the chain
};

// Exact point-to-segment search over every link; nullopt without obstacles.
std::optional<ClosestObstacle> closest_obstacle(const ChainParams& chain, const Vector& q,
                                                const WorldModel& world);

TaskOutput collision_task(const ChainParams& chain, const Vector& q, const WorldModel& world,
                          const TaskParams& params);

// sqrt(det(J J^T)) of the end-effector Jacobian.
double manipulability(const ChainParams& chain, const Vector& q);
Vector manipulability_gradient(const ChainParams& chain, const Vector& q);

TaskOutput manipulability_task(const ChainParams& chain, const Vector& q, const TaskParams& params);

// u = kappa (q_cmf - q), J = I.
TaskOutput comfort_task(const Vector& q, const WorldModel& world, const TaskParams& params,
                        double importance);
double comfort_cost(const Vector& q, const Vector& comfort, double kappa);

struct StackEvaluation {
  std::array<TaskOutput, kStackSize> tasks;  // in StackTask order
  double gamma = 1.0;                       // start/goal scaling applied to Jla, Coll, Mnp
  std::optional<ClosestObstacle> closest;
};

StackEvaluation evaluate_task_stack(const ChainParams& chain, const Vector& q,
                                    const WorldModel& world, const TaskParams& params);

}  // namespace hierctl
