#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hierctl/controllers.hpp"
#include "hierctl/robot_model.hpp"
#include "hierctl/tasks.hpp"
#include "hierctl/trajectory.hpp"

namespace hierctl {

enum class WeightChoice { kZero, kIdentity, kMass };

enum class ControlLaw {
  kEnergyAware,  // hierarchical_control with D, E
  kDynGhc,       // dyn_ghc_control with W
  kGhc,          // ghc_control
  kTradeoff,     // two_task_tradeoff with D, E
  kAlpha,        // two_task_alpha with W_map, W_proj, alpha
};

struct ControllerPreset {
  std::string name;
  ControlLaw law = ControlLaw::kEnergyAware;
  WeightChoice energy = WeightChoice::kZero;    // D
  WeightChoice tracking = WeightChoice::kZero;  // E
  WeightChoice map = WeightChoice::kIdentity;   // W or W_map
  WeightChoice proj = WeightChoice::kIdentity;  // W_proj
  double alpha = 1.0;
};

// ours-MI, ours-M0, ours-0M, ours-0I, dynghc-M, dynghc-I, ghc.
const std::vector<ControllerPreset>& hierarchy_presets();
// Closed-form two-task variants: tradeoff-{MI,MM,II,M0,0I}, alpha-{M-1,M-2_3,I-1,I-2_3,MI-1}.
const std::vector<ControllerPreset>& closed_form_presets();
std::optional<ControllerPreset> find_preset(std::string_view name);

Matrix resolve_weight(WeightChoice choice, const Matrix& mass);

// Velocity command for a primary task (J1, u1, eta = 1) strictly above a
// secondary joint-space command qd2 (J = I, eta = 0).
Vector two_level_command(const ControllerPreset& preset, const Matrix& j1, const Vector& u1,
                         const Vector& qd2, const Matrix& mass, ControlCommand* detail = nullptr);

struct TraceRow {
  double t = 0.0;
  Vector q;
  Vector qd;
  std::vector<double> importances;
  Matrix priorities;
  std::vector<Vector> contributions;
  Vector motion_computed;  // J#_W u of the motion task before projection
  double dyncon = 0.0;
  double min_distance = 0.0;
};

struct RunMetrics {
  double kinetic_energy = 0.0;  // sum of 1/2 qd^T M qd over samples
  double comfort_cost = 0.0;    // sum of kappa/2 ||q_cmf - q||^2 over samples
  std::size_t samples = 0;
  std::size_t steps = 0;
  bool converged = false;
  bool aborted = false;
  std::string abort_reason;
  double max_command_step = 0.0;  // max_k ||qd_k - qd_{k-1}||_inf
  double final_time = 0.0;
  Vector final_q;
  std::vector<TraceRow> trace;
};

class VelocityPolicy {
 public:
  virtual ~VelocityPolicy() = default;
  // `row` is non-null when the integrator records a trace.
  virtual Vector command(double t, const Vector& q, TraceRow* row) = 0;
  virtual bool finished(double t, const Vector& q) const = 0;
};

struct IntegrationOptions {
  double dt = 1e-3;
  double max_duration = 30.0;
  double sample_interval = 1e-2;
  double command_cap = 20.0;  // rad/s, infinity norm
  bool record_trace = false;
  Vector comfort_config;      // empty: comfort cost not accumulated
  double kappa = 0.1;
};

// Explicit Euler on q_{k+1} = q_k + qd_k dt until the policy reports
// completion or max_duration elapses.
RunMetrics integrate_velocity_control(const ChainParams& chain, VelocityPolicy& policy,
                                      const Vector& q0, const IntegrationOptions& options);

// Quintic PTP tracking (primary) with a comfort posture (secondary).
class TrackingPolicy : public VelocityPolicy {
 public:
  TrackingPolicy(const ChainParams& chain, QuinticTrajectory trajectory, ControllerPreset preset,
                 Vector comfort, double kappa, double feedback_gain);

  Vector command(double t, const Vector& q, TraceRow* row) override;
  bool finished(double t, const Vector& q) const override;

  // Closed-form cross-check hook: the last computed primary target and
  // secondary command.
  const Vector& last_primary_target() const { return last_u1_; }
  const Vector& last_secondary_command() const { return last_qd2_; }

 private:
  const ChainParams* chain_;
  QuinticTrajectory trajectory_;
  ControllerPreset preset_;
  Vector comfort_;
  double kappa_;
  double feedback_gain_;
  Vector last_u1_;
  Vector last_qd2_;
};

enum class PriorityMode {
  kMetric,  // continuous eta
  kSnap,    // eta rounded to {0, 1} before use
};

// Four-task stack (Coll, Jla, Motion, Mnp) with priorities from the
// importance metrics.
class StackPolicy : public VelocityPolicy {
 public:
  StackPolicy(const ChainParams& chain, WorldModel world, TaskParams params, ControllerPreset preset,
              PriorityMode mode, double goal_tolerance = 1e-3);

  Vector command(double t, const Vector& q, TraceRow* row) override;
  bool finished(double t, const Vector& q) const override;

  // One full control cycle: tasks, priority matrix, hierarchy.
  ControlCommand cycle(const Vector& q, StackEvaluation* evaluation = nullptr,
                       PriorityMatrix* priorities = nullptr) const;

 private:
  const ChainParams* chain_;
  WorldModel world_;
  TaskParams params_;
  ControllerPreset preset_;
  PriorityMode mode_;
  double goal_tolerance_;
};

struct Scenario {
  std::size_t index = 0;
  Vector start_q;
  Eigen::Vector2d goal;
};

// Start configurations uniform in the joint limits shrunk by 10 %, goals by
// rejection sampling in the annulus [0.1, 0.8] x reach and at least 0.2 x
// reach away from the start. One generator, drawn sequentially.
std::vector<Scenario> sample_scenarios(const ChainParams& chain, std::size_t count, std::uint64_t seed);

struct BenchmarkOptions {
  std::size_t scenarios = 100;
  std::uint64_t seed = 42;
  double duration = 5.0;
  double feedback_gain = 5.0;
  IntegrationOptions integration;
  Vector comfort_config;
  double kappa = 0.1;
  unsigned threads = 1;
};

struct BenchmarkRow {
  std::string preset;
  double mean_ekin = 0.0;
  double mean_l = 0.0;
  double mean_sum = 0.0;
  std::size_t n_completed = 0;
};

struct ScenarioResult {
  double kinetic_energy = 0.0;
  double comfort_cost = 0.0;
  bool ok = false;
};

struct BenchmarkTable {
  std::uint64_t seed = 0;
  std::size_t scenarios = 0;
  std::size_t excluded = 0;  // scenarios failing under at least one preset
  std::vector<BenchmarkRow> rows;
  std::vector<std::vector<ScenarioResult>> per_scenario;  // [preset][scenario]
};

BenchmarkTable run_benchmark(const ChainParams& chain, std::span<const ControllerPreset> presets,
                             const BenchmarkOptions& options);

// One tracking run, as used by run_benchmark.
RunMetrics run_tracking_scenario(const ChainParams& chain, const ControllerPreset& preset,
                                 const Scenario& scenario, const BenchmarkOptions& options,
                                 bool record_trace = false);

struct LabeledTraces {
  std::vector<double> time;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;  // [label][sample]
  std::vector<bool> flagged;                // per sample, e.g. singular
  double max_constraint_residual = 0.0;     // ||J qd - xd_d|| over all laws
};

struct ExperimentOptions {
  double dt = 1e-3;              // RK4 step
  double sample_interval = 1e-2;
};

// Kinetic energy along the same task-space trajectory for velocity mapping
// (W = I, M), acceleration mapping (W = I, M) and the energy-optimal
// acceleration mapping (W = M). Labels: vel_W=I, vel_W=M, acc_W=I, acc_W=M,
// accopt_W=M.
LabeledTraces energy_mapping_experiment(const ChainParams& chain, const QuinticTrajectory& trajectory,
                                        const Vector& q0, const ExperimentOptions& options = {});

// Dynamical consistency of unit secondary commands projected below the
// tracking task. Labels: torque_W=M, torque_W=I, velocity_W=M,
// velocity_W=I, acceleration_W=M, acceleration_W=I.
LabeledTraces consistency_experiment(const ChainParams& chain, const QuinticTrajectory& trajectory,
                                     const Vector& q0, const ExperimentOptions& options = {});

}  // namespace hierctl
