#include <gtest/gtest.h>

#include <numbers>

#include "hierctl/errors.hpp"
#include "hierctl/tasks.hpp"
#include "support/oracles.hpp"

using namespace hierctl;
using oracle::max_abs;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

std::vector<JointLimit> limits(std::size_t n, double lo = -1.0, double hi = 1.0) {
  return std::vector<JointLimit>(n, JointLimit{lo, hi});
}

}  // namespace

TEST(ScalingGamma, Examples) {
  EXPECT_EQ(scaling_gamma(0.0, 0.1), 0.0);
  EXPECT_NEAR(scaling_gamma(0.05, 0.1), 0.5, 1e-15);
  EXPECT_EQ(scaling_gamma(0.1, 0.1), 1.0);
  EXPECT_EQ(scaling_gamma(3.0, 0.1), 1.0);
}

TEST(ScalingGamma, SmoothAtEndpoints) {
  const double h = 1e-9, db = 0.1;
  const double left0 = (scaling_gamma(h, db) - scaling_gamma(0.0, db)) / h;
  const double right_end = (scaling_gamma(db + h, db) - scaling_gamma(db, db)) / h;
  const double left_end = (scaling_gamma(db, db) - scaling_gamma(db - h, db)) / h;
  EXPECT_LT(std::abs(left0), 1e-6);
  EXPECT_LT(std::abs(right_end - left_end), 1e-6);
}

TEST(ScalingGamma, MonotoneOnBrakingInterval) {
  double prev = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double g = scaling_gamma(0.1 * i / 1000.0, 0.1);
    EXPECT_GE(g, prev);
    EXPECT_GE(g, 0.0);
    EXPECT_LE(g, 1.0);
    prev = g;
  }
}

class MotionTaskTest : public ::testing::Test {
 protected:
  ChainParams chain = ChainParams::uniform(2, 1.0, 1.0, 3.0);
  TaskParams params;
  WorldModel world;
};

TEST_F(MotionTaskTest, FarFromStartAndGoalMovesAtFullSpeed) {
  const Vector q = vec({std::numbers::pi / 2, std::numbers::pi});  // end effector at the origin
  ASSERT_LT(forward_kinematics(chain, q).norm(), 1e-12);
  world.start = {-1.0, 0.0};
  world.goal = {1.0, 0.0};
  const TaskOutput t = motion_task(chain, q, world, params);
  EXPECT_LT((t.target - vec({params.xdot_max, 0.0})).norm(), 1e-12);
  EXPECT_EQ(t.importance, 1.0);
  EXPECT_LT(max_abs(t.jacobian - jacobian(chain, q)), 1e-15);
}

TEST_F(MotionTaskTest, AtGoalIsZero) {
  const Vector q = vec({0.3, 0.4});
  world.start = {-1.0, 0.0};
  world.goal = forward_kinematics(chain, q);
  EXPECT_EQ(motion_task(chain, q, world, params).target.norm(), 0.0);
}

TEST_F(MotionTaskTest, HalfBrakingDistanceFromGoal) {
  const Vector q = vec({std::numbers::pi / 2, std::numbers::pi});
  world.start = {-1.0, 0.0};
  world.goal = {params.d_break / 2, 0.0};
  EXPECT_NEAR(motion_task(chain, q, world, params).target.norm(), 0.5 * params.xdot_max, 1e-12);
}

TEST(JointLimitTask, Examples) {
  TaskParams p;
  const auto lim = limits(3);
  const TaskOutput centered = joint_limit_task(Vector::Zero(3), p, lim);
  EXPECT_EQ(centered.importance, 0.0);
  EXPECT_EQ(max_abs(centered.jacobian), 0.0);
  EXPECT_EQ(centered.target.norm(), 0.0);

  const TaskOutput at_lower = joint_limit_task(vec({0.0, -1.0, 0.0}), p, lim);
  EXPECT_EQ(at_lower.importance, 1.0);
  EXPECT_EQ(at_lower.jacobian(1, 1), 1.0);
  EXPECT_GT(at_lower.target(1), 0.0);

  const TaskOutput half = joint_limit_task(vec({0.0, -1.0 + p.jla_threshold / 2, 0.0}), p, lim);
  EXPECT_NEAR(half.importance, 0.5, 1e-12);

  const TaskOutput beyond = joint_limit_task(vec({1.3, 0.0, 0.0}), p, lim);
  EXPECT_EQ(beyond.importance, 1.0);
  EXPECT_LT(beyond.target(0), 0.0);
  EXPECT_NEAR(beyond.target(0), -p.xdot_max, 1e-15);
}

TEST(JointLimitTask, CountMismatchIsInputError) {
  EXPECT_THROW(joint_limit_task(Vector::Zero(2), TaskParams{}, limits(3)), InputError);
}

TEST(CollisionTask, NoObstacles) {
  const ChainParams c = ChainParams::uniform(2, 1.0, 1.0, 3.0);
  const TaskOutput t = collision_task(c, vec({0.1, 0.2}), WorldModel{}, TaskParams{});
  EXPECT_EQ(t.importance, 0.0);
  EXPECT_EQ(t.target.norm(), 0.0);
}

TEST(CollisionTask, PointCircleExample) {
  // single link lying on +x, its closest point to the circle is the base
  const ChainParams c = ChainParams::uniform(1, 1.0, 1.0, 3.0);
  WorldModel w;
  w.obstacles = {{{0.0, 3.0}, 1.0}};
  TaskParams p;
  p.coll_activation = 4.0;
  const auto closest = closest_obstacle(c, vec({0.0}), w);
  ASSERT_TRUE(closest.has_value());
  EXPECT_NEAR(closest->distance, 2.0, 1e-15);
  EXPECT_LT((closest->direction - Eigen::Vector2d(0, -1)).norm(), 1e-15);
  EXPECT_LT(closest->position.norm(), 1e-15);
  const TaskOutput t = collision_task(c, vec({0.0}), w, p);
  EXPECT_NEAR(t.importance, 0.5, 1e-15);
  EXPECT_LT((t.target - vec({0.0, -0.5 * p.xdot_max})).norm(), 1e-15);
}

TEST(CollisionTask, OutsideActivationAndPenetration) {
  const ChainParams c = ChainParams::uniform(1, 1.0, 1.0, 3.0);
  WorldModel w;
  w.obstacles = {{{0.5, 2.0}, 0.5}};
  EXPECT_EQ(collision_task(c, vec({0.0}), w, TaskParams{}).importance, 0.0);
  w.obstacles = {{{0.5, 0.1}, 0.2}};
  const TaskOutput inside = collision_task(c, vec({0.0}), w, TaskParams{});
  EXPECT_EQ(inside.importance, 1.0);
  EXPECT_NEAR(inside.target.norm(), TaskParams{}.xdot_max, 1e-15);
}

TEST(CollisionTask, ClosestDistanceMatchesDenseSampling) {
  oracle::Rng rng(41);
  const ChainParams c = default_benchmark_chain();
  for (int k = 0; k < 50; ++k) {
    const Vector q = rng.vector(4, -2.5, 2.5);
    WorldModel w;
    w.obstacles = {{{rng.uniform(-2, 2), rng.uniform(-2, 2)}, rng.uniform(0.05, 0.3)},
                   {{rng.uniform(-2, 2), rng.uniform(-2, 2)}, rng.uniform(0.05, 0.3)}};
    double sampled = std::numeric_limits<double>::infinity();
    for (std::size_t link = 0; link < 4; ++link) {
      for (int s = 0; s <= 2000; ++s) {
        const Eigen::Vector2d p = oracle::planar_point(c.link_lengths, q, link, s / 2000.0);
        for (const Circle& o : w.obstacles) sampled = std::min(sampled, (p - o.center).norm() - o.radius);
      }
    }
    const auto closest = closest_obstacle(c, q, w);
    ASSERT_TRUE(closest.has_value());
    EXPECT_LE(closest->distance, sampled + 1e-12);
    EXPECT_GT(closest->distance, sampled - 1e-3);
  }
}

TEST(ManipulabilityTask, TwoLinkDeterminant) {
  const ChainParams c = ChainParams::uniform(2, 1.0, 1.0, 3.0);
  for (double q2 : {0.3, 1.0, std::numbers::pi / 2, 2.5}) {
    EXPECT_NEAR(manipulability(c, vec({0.7, q2})), std::abs(std::sin(q2)), 1e-12);
  }
  const TaskOutput bent = manipulability_task(c, vec({0.0, std::numbers::pi / 2}), TaskParams{});
  EXPECT_EQ(bent.importance, 0.0);
  EXPECT_LT(max_abs(bent.jacobian - Matrix::Identity(2, 2)), 1e-15);
  const TaskOutput straight = manipulability_task(c, vec({0.0, 0.0}), TaskParams{});
  EXPECT_EQ(straight.importance, 1.0);
  EXPECT_TRUE(straight.target.allFinite());
}

TEST(ManipulabilityTask, RampMidpoint) {
  // l = |sin q2| for two unit links; pick q2 with l = 0.06
  const ChainParams c = ChainParams::uniform(2, 1.0, 1.0, 3.0);
  const TaskOutput t = manipulability_task(c, vec({0.0, std::asin(0.06)}), TaskParams{});
  EXPECT_NEAR(t.importance, 0.5, 1e-9);
}

TEST(ManipulabilityTask, GradientMatchesAnalyticTwoLink) {
  const ChainParams c = ChainParams::uniform(2, 1.0, 1.0, 3.0);
  const Vector g = manipulability_gradient(c, vec({0.4, 1.1}));
  EXPECT_NEAR(g(0), 0.0, 1e-8);
  EXPECT_NEAR(g(1), std::cos(1.1), 1e-8);
}

TEST(ComfortTask, Examples) {
  TaskParams p;
  WorldModel w;
  w.comfort_config = vec({1, 0, 0, 0});
  EXPECT_EQ(comfort_task(w.comfort_config, w, p, 0.0).target.norm(), 0.0);
  const TaskOutput t = comfort_task(Vector::Zero(4), w, p, 0.0);
  EXPECT_LT((t.target - vec({0.1, 0, 0, 0})).norm(), 1e-15);
  EXPECT_LT(max_abs(t.jacobian - Matrix::Identity(4, 4)), 1e-15);
  const Vector q = Vector::Zero(4);
  const Vector closer = w.comfort_config - (w.comfort_config - q) / std::sqrt(2.0);
  EXPECT_NEAR(comfort_cost(closer, w.comfort_config, 0.1), 0.5 * comfort_cost(q, w.comfort_config, 0.1), 1e-15);
  EXPECT_THROW(comfort_task(Vector::Zero(3), w, p, 0.0), InputError);
  EXPECT_THROW(comfort_task(Vector::Zero(4), w, p, 1.5), InputError);
}

TEST(TaskStack, ImportancesInUnitIntervalAndLipschitz) {
  const ChainParams c = default_benchmark_chain();
  WorldModel w;
  w.obstacles = {{{0.4, 0.6}, 0.1}, {{-0.5, 0.3}, 0.15}};
  w.goal = {0.8, 0.4};
  w.start = {1.5, 0.0};
  const TaskParams p;
  oracle::Rng rng(42);
  for (int path = 0; path < 20; ++path) {
    const Vector a = rng.vector(4, -2.8, 2.8), b = rng.vector(4, -2.8, 2.8);
    const int steps = 5000;
    const double dq = (b - a).norm() / steps;
    std::array<double, 4> prev{};
    for (int s = 0; s <= steps; ++s) {
      const Vector q = a + (b - a) * (static_cast<double>(s) / steps);
      const StackEvaluation e = evaluate_task_stack(c, q, w, p);
      for (std::size_t i = 0; i < 4; ++i) {
        const double eta = e.tasks[i].importance;
        EXPECT_GE(eta, 0.0);
        EXPECT_LE(eta, 1.0);
        // ramps are bounded by 1/(0.2 rad), 1/(0.3 m) * reach and dl/dq / 0.04
        if (s > 0) EXPECT_LE(std::abs(eta - prev[i]), 60.0 * dq + 1e-12) << "task " << i;
        prev[i] = eta;
      }
    }
  }
}

TEST(TaskStack, GammaScalesAuxiliaryTasksNearGoal) {
  const ChainParams c = default_benchmark_chain();
  const Vector q = vec({0.3, 0.6, 0.6, 0.6});
  WorldModel w;
  w.start = {5.0, 5.0};
  w.goal = forward_kinematics(c, q);
  const StackEvaluation e = evaluate_task_stack(c, q, w, TaskParams{});
  EXPECT_EQ(e.gamma, 0.0);
  EXPECT_EQ(e.tasks[index_of(StackTask::kManipulability)].target.norm(), 0.0);
  EXPECT_EQ(e.tasks[index_of(StackTask::kMotion)].target.norm(), 0.0);
}
