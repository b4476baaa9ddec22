#include <gtest/gtest.h>

#include "hierctl/config.hpp"
#include "hierctl/errors.hpp"
#include "hierctl/runs.hpp"
#include "hierctl/simulation.hpp"
#include "hierctl/trajectory.hpp"
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

class ZeroPolicy : public VelocityPolicy {
 public:
  Vector command(double, const Vector& q, TraceRow*) override { return Vector::Zero(q.size()); }
  bool finished(double, const Vector&) const override { return false; }
};

// Motion task alone, W = I.
class MotionOnlyPolicy : public VelocityPolicy {
 public:
  MotionOnlyPolicy(const ChainParams& c, WorldModel w) : chain_(c), world_(std::move(w)) {}
  Vector command(double, const Vector& q, TraceRow*) override {
    const TaskOutput t = motion_task(chain_, q, world_, params_);
    return map_velocity(t.jacobian, Matrix::Identity(q.size(), q.size()), t.target);
  }
  bool finished(double, const Vector& q) const override {
    return (forward_kinematics(chain_, q) - world_.goal).norm() < 1e-3;
  }

 private:
  const ChainParams& chain_;
  WorldModel world_;
  TaskParams params_;
};

}  // namespace

TEST(Quintic, BoundaryConditions) {
  const QuinticTrajectory t({0.1, 0.2}, {0.7, -0.4}, 3.0);
  EXPECT_LT((t.position(0.0) - Eigen::Vector2d(0.1, 0.2)).norm(), 1e-15);
  EXPECT_LT((t.position(3.0) - Eigen::Vector2d(0.7, -0.4)).norm(), 1e-15);
  EXPECT_LT(t.velocity(0.0).norm(), 1e-15);
  EXPECT_LT(t.velocity(3.0).norm(), 1e-14);
  EXPECT_LT(t.acceleration(0.0).norm(), 1e-15);
  EXPECT_LT(t.acceleration(3.0).norm(), 1e-14);
  EXPECT_LT((t.position(1.5) - Eigen::Vector2d(0.4, -0.1)).norm(), 1e-15);
  EXPECT_LT((t.position(10.0) - t.goal()).norm(), 1e-15);
  EXPECT_THROW(QuinticTrajectory({0, 0}, {1, 0}, 0.0), InputError);
}

TEST(Quintic, DerivativesMatchFiniteDifferences) {
  const QuinticTrajectory t({0.1, 0.2}, {0.7, -0.4}, 3.0);
  for (double s = 0.1; s < 2.95; s += 0.17) {
    const Matrix v = oracle::central_difference([&](double h) { return Matrix(t.position(s + h)); });
    const Matrix a = oracle::central_difference([&](double h) { return Matrix(t.velocity(s + h)); });
    EXPECT_LT((Matrix(t.velocity(s)) - v).norm(), 1e-8);
    EXPECT_LT((Matrix(t.acceleration(s)) - a).norm(), 1e-8);
  }
  const auto& c = t.coefficients();
  EXPECT_EQ(c[0], 0.0);
  EXPECT_NEAR(c[3] * 27.0, 10.0, 1e-12);
}

TEST(Pt1, ConstantInputConvergesMonotonically) {
  std::vector<Vector> signal(500, vec({1.0}));
  const auto out = output_filter_pt1(signal, 0.05, 1e-3, vec({0.0}));
  ASSERT_EQ(out.size(), 500u);
  EXPECT_GT(out[0](0), 0.0);
  for (std::size_t k = 1; k < out.size(); ++k) EXPECT_GE(out[k](0), out[k - 1](0));
  EXPECT_NEAR(out.back()(0), 1.0, 1e-3);
  EXPECT_LE(out.back()(0), 1.0);
}

TEST(Pt1, TimeConstantEqualToStepConvergesInOneStep) {
  Pt1Filter f(vec({0.0, 2.0}), 1e-3, 1e-3);
  EXPECT_LT((f.update(vec({3.0, -1.0})) - vec({3.0, -1.0})).norm(), 1e-15);
}

TEST(Pt1, HugeTimeConstantFreezesOutput) {
  std::vector<Vector> signal(100, vec({5.0}));
  const auto out = output_filter_pt1(signal, 1e300, 1e-3, vec({0.25}));
  EXPECT_NEAR(out.back()(0), 0.25, 1e-12);
  EXPECT_THROW(Pt1Filter(vec({0.0}), 0.0, 1e-3), InputError);
}

TEST(Integrate, ZeroCommandKeepsConfiguration) {
  const ChainParams c = default_benchmark_chain();
  ZeroPolicy p;
  IntegrationOptions o;
  o.max_duration = 0.5;
  const Vector q0 = vec({0.1, -0.2, 0.3, 0.4});
  const RunMetrics m = integrate_velocity_control(c, p, q0, o);
  EXPECT_EQ(m.final_q, q0);
  EXPECT_EQ(m.kinetic_energy, 0.0);
  EXPECT_FALSE(m.converged);
  EXPECT_FALSE(m.aborted);
  EXPECT_GE(m.steps, 499u);
}

TEST(Integrate, MotionTaskAloneConverges) {
  const ChainParams c = default_benchmark_chain();
  const Vector q0 = vec({0.3, 0.6, 0.6, 0.6});
  WorldModel w;
  w.start = forward_kinematics(c, q0);
  w.goal = {0.9, 0.5};
  MotionOnlyPolicy p(c, w);
  IntegrationOptions o;
  o.max_duration = 60.0;
  const RunMetrics m = integrate_velocity_control(c, p, q0, o);
  EXPECT_TRUE(m.converged);
  EXPECT_LT((forward_kinematics(c, m.final_q) - w.goal).norm(), 1e-3);
}

TEST(Integrate, CommandAboveCapAborts) {
  class Wild : public VelocityPolicy {
   public:
    Vector command(double, const Vector& q, TraceRow*) override { return Vector::Constant(q.size(), 100.0); }
    bool finished(double, const Vector&) const override { return false; }
  } p;
  const RunMetrics m = integrate_velocity_control(default_benchmark_chain(), p, Vector::Zero(4), {});
  EXPECT_TRUE(m.aborted);
  EXPECT_FALSE(m.abort_reason.empty());
}

TEST(Integrate, InvalidInputsThrow) {
  ZeroPolicy p;
  IntegrationOptions o;
  o.dt = 0.0;
  EXPECT_THROW(integrate_velocity_control(default_benchmark_chain(), p, Vector::Zero(4), o), InputError);
  EXPECT_THROW(integrate_velocity_control(default_benchmark_chain(), p, Vector::Zero(3), {}), InputError);
}

TEST(Presets, NamesResolve) {
  for (const char* name : {"ours-MI", "ours-M0", "ours-0M", "ours-0I", "dynghc-M", "dynghc-I", "ghc"}) {
    EXPECT_TRUE(find_preset(name).has_value()) << name;
  }
  EXPECT_EQ(hierarchy_presets().size(), 7u);
  EXPECT_FALSE(find_preset("nope").has_value());
}

TEST(Presets, TwoLevelCommandMatchesClosedForms) {
  const ChainParams c = default_benchmark_chain();
  oracle::Rng rng(81);
  for (int k = 0; k < 50; ++k) {
    const Vector q = rng.vector(4, -2.5, 2.5);
    const Matrix j = jacobian(c, q), m = mass_matrix(c, q);
    const Vector u1 = rng.vector(2), qd2 = rng.vector(4);
    const Matrix id = Matrix::Identity(4, 4), z = Matrix::Zero(4, 4);
    EXPECT_LT(max_abs(two_level_command(*find_preset("ours-MI"), j, u1, qd2, m) - two_task_tradeoff(j, u1, qd2, m, id)),
              1e-9);
    EXPECT_LT(max_abs(two_level_command(*find_preset("ours-M0"), j, u1, qd2, m) - map_velocity(j, m, u1)), 1e-9);
    EXPECT_LT(max_abs(two_level_command(*find_preset("ghc"), j, u1, qd2, m) - two_task_alpha(j, u1, qd2, id, id, 1)),
              1e-9);
    EXPECT_LT(max_abs(two_level_command(*find_preset("dynghc-M"), j, u1, qd2, m) -
                      two_task_alpha(j, u1, qd2, m, m, 1)),
              1e-9);
    EXPECT_LT(max_abs(two_level_command(*find_preset("tradeoff-MI"), j, u1, qd2, m) -
                      two_level_command(*find_preset("ours-MI"), j, u1, qd2, m)),
              1e-9);
    (void)z;
  }
}

TEST(Scenarios, SamplerRespectsBoundsAndSeed) {
  const ChainParams c = default_benchmark_chain();
  const auto a = sample_scenarios(c, 200, 7);
  const auto b = sample_scenarios(c, 200, 7);
  const auto other = sample_scenarios(c, 200, 8);
  const double r = c.reach();
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].index, i);
    EXPECT_EQ(a[i].start_q, b[i].start_q);
    EXPECT_EQ(a[i].goal, b[i].goal);
    const double g = a[i].goal.norm();
    EXPECT_GE(g, 0.1 * r);
    EXPECT_LE(g, 0.8 * r);
    EXPECT_GE((a[i].goal - forward_kinematics(c, a[i].start_q)).norm(), 0.2 * r);
    for (Eigen::Index j = 0; j < 4; ++j) {
      const JointLimit l = c.joint_limits[static_cast<std::size_t>(j)];
      const double span = l.upper - l.lower;
      EXPECT_GE(a[i].start_q(j), l.lower + 0.05 * span - 1e-12);
      EXPECT_LE(a[i].start_q(j), l.upper - 0.05 * span + 1e-12);
    }
  }
  EXPECT_NE(a[0].start_q, other[0].start_q);
  // prefixes agree: one generator drawn sequentially
  const auto prefix = sample_scenarios(c, 10, 7);
  for (std::size_t i = 0; i < prefix.size(); ++i) EXPECT_EQ(prefix[i].goal, a[i].goal);
}

TEST(Tracking, RepeatedRunsAreBitIdentical) {
  const RunConfig cfg = default_run_config();
  const auto sc = sample_scenarios(cfg.chain, 1, 42);
  const RunMetrics a = run_tracking_scenario(cfg.chain, *find_preset("ours-MI"), sc[0], cfg.benchmark, true);
  const RunMetrics b = run_tracking_scenario(cfg.chain, *find_preset("ours-MI"), sc[0], cfg.benchmark, true);
  EXPECT_EQ(a.kinetic_energy, b.kinetic_energy);
  EXPECT_EQ(a.comfort_cost, b.comfort_cost);
  EXPECT_EQ(a.final_q, b.final_q);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) EXPECT_EQ(a.trace[i].qd, b.trace[i].qd);
  EXPECT_GT(a.kinetic_energy, 0.0);
  EXPECT_GT(a.comfort_cost, 0.0);
}

TEST(Tracking, HierarchyMatchesClosedFormAlongRun) {
  const RunConfig cfg = default_run_config();
  const auto sc = sample_scenarios(cfg.chain, 3, 42);
  for (const Scenario& s : sc) {
    const RunMetrics ours = run_tracking_scenario(cfg.chain, *find_preset("ours-MI"), s, cfg.benchmark, true);
    const RunMetrics closed = run_tracking_scenario(cfg.chain, *find_preset("tradeoff-MI"), s, cfg.benchmark, true);
    ASSERT_EQ(ours.trace.size(), closed.trace.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < ours.trace.size(); ++i)
      worst = std::max(worst, max_abs(ours.trace[i].qd - closed.trace[i].qd));
    EXPECT_LT(worst, 1e-9);
  }
}

TEST(Benchmark, PairedAndThreadIndependent) {
  const RunConfig cfg = default_run_config();
  BenchmarkOptions o = cfg.benchmark;
  o.scenarios = 6;
  o.threads = 1;
  std::vector<ControllerPreset> presets = {*find_preset("ours-MI"), *find_preset("dynghc-I"), *find_preset("ghc")};
  const BenchmarkTable one = run_benchmark(cfg.chain, presets, o);
  o.threads = 3;
  const BenchmarkTable three = run_benchmark(cfg.chain, presets, o);
  ASSERT_EQ(one.rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(one.rows[i].preset, presets[i].name);
    EXPECT_EQ(one.rows[i].mean_ekin, three.rows[i].mean_ekin);
    EXPECT_EQ(one.rows[i].mean_l, three.rows[i].mean_l);
    EXPECT_EQ(one.rows[i].n_completed, o.scenarios - one.excluded);
    EXPECT_NEAR(one.rows[i].mean_sum, one.rows[i].mean_ekin + one.rows[i].mean_l, 1e-12);
  }
  EXPECT_NEAR(one.rows[1].mean_ekin, one.rows[2].mean_ekin, 1e-9 * one.rows[2].mean_ekin);
  // a scenario counts only if every preset completed it
  std::size_t paired = 0;
  for (std::size_t s = 0; s < o.scenarios; ++s) {
    bool all = true;
    for (std::size_t p = 0; p < 3; ++p) all = all && one.per_scenario[p][s].ok;
    paired += all ? 1 : 0;
  }
  EXPECT_EQ(paired, o.scenarios - one.excluded);
  o.scenarios = 0;
  EXPECT_THROW(run_benchmark(cfg.chain, presets, o), InputError);
}

TEST(Experiments, EnergyMappingShortTrajectory) {
  const RunConfig cfg = default_run_config();
  const Eigen::Vector2d x0 = forward_kinematics(cfg.chain, cfg.experiment_start_q);
  const QuinticTrajectory traj(x0, cfg.experiment_goal, 2.0);
  const LabeledTraces tr = energy_mapping_experiment(cfg.chain, traj, cfg.experiment_start_q);
  ASSERT_EQ(tr.labels.size(), 5u);
  EXPECT_EQ(tr.labels[0], "vel_W=I");
  EXPECT_EQ(tr.labels[4], "accopt_W=M");
  EXPECT_LT(tr.max_constraint_residual, 1e-6);
  for (std::size_t s = 0; s < tr.time.size(); ++s) {
    const double a = tr.values[1][s], b = tr.values[4][s];
    EXPECT_LE(std::abs(a - b), 1e-5 * std::max(a, b) + 1e-12) << "sample " << s;
    for (const auto& v : tr.values) EXPECT_GE(v[s], 0.0);
  }
}

TEST(Experiments, ConsistencyShortTrajectory) {
  const RunConfig cfg = default_run_config();
  const Eigen::Vector2d x0 = forward_kinematics(cfg.chain, cfg.experiment_start_q);
  const QuinticTrajectory traj(x0, cfg.experiment_goal, 2.0);
  const LabeledTraces tr = consistency_experiment(cfg.chain, traj, cfg.experiment_start_q);
  ASSERT_EQ(tr.labels.size(), 6u);
  auto max_of = [&](std::size_t i) { return *std::max_element(tr.values[i].begin(), tr.values[i].end()); };
  EXPECT_LT(max_of(0), 1e-9);
  EXPECT_GT(max_of(1), 1e-3);
  for (std::size_t i = 2; i < 6; ++i) EXPECT_LT(max_of(i), 1e-9) << tr.labels[i];
}

class TraceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const RunConfig cfg = default_run_config();
    obstacle_ = new RunMetrics(run_trace(cfg, resolve_trace_scenario(cfg, "obstacle"), PriorityMode::kMetric));
    free_ = new RunMetrics(run_trace(cfg, resolve_trace_scenario(cfg, "free"), PriorityMode::kMetric));
  }
  static void TearDownTestSuite() {
    delete obstacle_;
    delete free_;
  }
  static RunMetrics* obstacle_;
  static RunMetrics* free_;
};
RunMetrics* TraceTest::obstacle_ = nullptr;
RunMetrics* TraceTest::free_ = nullptr;

TEST_F(TraceTest, ContributionsSumToCommand) {
  ASSERT_FALSE(obstacle_->trace.empty());
  for (const TraceRow& r : obstacle_->trace) {
    Vector sum = Vector::Zero(r.qd.size());
    for (const Vector& c : r.contributions) sum += c;
    EXPECT_LE(max_abs(sum - r.qd), 1e-12);
  }
}

TEST_F(TraceTest, FreeSpaceHasNoCollisionImportance) {
  ASSERT_FALSE(free_->trace.empty());
  EXPECT_FALSE(free_->aborted);
  for (const TraceRow& r : free_->trace) EXPECT_EQ(r.importances[0], 0.0);
}

TEST_F(TraceTest, CollisionImportanceFollowsDistance) {
  const double activation = TaskParams{}.coll_activation;
  bool active = false;
  for (const TraceRow& r : obstacle_->trace) {
    EXPECT_EQ(r.importances[0] > 0.0, r.min_distance < activation) << "t = " << r.t;
    active = active || r.importances[0] > 0.0;
  }
  EXPECT_TRUE(active);
}

TEST_F(TraceTest, PriorityEntriesFollowImportances) {
  for (const TraceRow& r : obstacle_->trace) {
    const PriorityMatrix expected =
        build_priority_matrix(r.importances[0], r.importances[1], r.importances[2], r.importances[3]);
    EXPECT_EQ(max_abs(r.priorities - expected.entries()), 0.0);
  }
}

TEST(Perf, ReportsRequestedCycles) {
  RunConfig cfg = default_run_config("planar7");
  cfg.perf.cycles = 200;
  cfg.perf.repeats = 2;
  const PerfReport r = run_perf(cfg);
  EXPECT_EQ(r.dof, 7u);
  EXPECT_EQ(r.cycles, 200u);
  EXPECT_EQ(r.repeat_means_ms.size(), 2u);
  EXPECT_EQ(r.active_tasks, 4u);
  EXPECT_GT(r.mean_ms, 0.0);
  EXPECT_LE(r.median_ms, r.max_ms);
  EXPECT_LE(r.p99_ms, r.max_ms);
}
