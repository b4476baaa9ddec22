#include "hierctl/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hierctl/errors.hpp"

namespace hierctl {
namespace {

constexpr double kSnapThreshold = 0.5;

std::vector<ControllerPreset> make_hierarchy_presets() {
  using W = WeightChoice;
  return {
      {"ours-MI", ControlLaw::kEnergyAware, W::kMass, W::kIdentity},
      {"ours-M0", ControlLaw::kEnergyAware, W::kMass, W::kZero},
      {"ours-0M", ControlLaw::kEnergyAware, W::kZero, W::kMass},
      {"ours-0I", ControlLaw::kEnergyAware, W::kZero, W::kIdentity},
      {"dynghc-M", ControlLaw::kDynGhc, W::kZero, W::kZero, W::kMass},
      {"dynghc-I", ControlLaw::kDynGhc, W::kZero, W::kZero, W::kIdentity},
      {"ghc", ControlLaw::kGhc},
  };
}

std::vector<ControllerPreset> make_closed_form_presets() {
  using W = WeightChoice;
  const double two_thirds = 2.0 / 3.0;
  return {
      {"tradeoff-MI", ControlLaw::kTradeoff, W::kMass, W::kIdentity},
      {"tradeoff-MM", ControlLaw::kTradeoff, W::kMass, W::kMass},
      {"tradeoff-II", ControlLaw::kTradeoff, W::kIdentity, W::kIdentity},
      {"tradeoff-M0", ControlLaw::kTradeoff, W::kMass, W::kZero},
      {"tradeoff-0I", ControlLaw::kTradeoff, W::kZero, W::kIdentity},
      {"alpha-M-1", ControlLaw::kAlpha, W::kZero, W::kZero, W::kMass, W::kMass, 1.0},
      {"alpha-M-2_3", ControlLaw::kAlpha, W::kZero, W::kZero, W::kMass, W::kMass, two_thirds},
      {"alpha-I-1", ControlLaw::kAlpha, W::kZero, W::kZero, W::kIdentity, W::kIdentity, 1.0},
      {"alpha-I-2_3", ControlLaw::kAlpha, W::kZero, W::kZero, W::kIdentity, W::kIdentity, two_thirds},
      {"alpha-MI-1", ControlLaw::kAlpha, W::kZero, W::kZero, W::kMass, W::kIdentity, 1.0},
  };
}

ControlCommand stack_command(const ControllerPreset& preset, std::span<const TaskOutput> tasks,
                             const PriorityMatrix& priorities, const Matrix& mass) {
  switch (preset.law) {
    case ControlLaw::kEnergyAware: {
      HierarchyInput input{{tasks.begin(), tasks.end()},
                           ControlWeights(resolve_weight(preset.energy, mass),
                                          resolve_weight(preset.tracking, mass))};
      return hierarchical_control(input, priorities);
    }
    case ControlLaw::kDynGhc:
      return dyn_ghc_control(tasks, priorities, resolve_weight(preset.map, mass));
    case ControlLaw::kGhc:
      return ghc_control(tasks, priorities);
    default:
      throw InputError("preset " + preset.name + " is a closed-form two-task law");
  }
}

// Weight used by the task mapping of a hierarchical preset.
Matrix mapping_weight(const ControllerPreset& preset, const Matrix& mass) {
  switch (preset.law) {
    case ControlLaw::kEnergyAware:
      return resolve_weight(preset.energy, mass) + 2.0 * resolve_weight(preset.tracking, mass);
    case ControlLaw::kDynGhc:
    case ControlLaw::kAlpha:
      return resolve_weight(preset.map, mass);
    case ControlLaw::kTradeoff:
      return resolve_weight(preset.energy, mass) + 2.0 * resolve_weight(preset.tracking, mass);
    case ControlLaw::kGhc:
      break;
  }
  return Matrix::Identity(mass.rows(), mass.cols());
}

}  // namespace

const std::vector<ControllerPreset>& hierarchy_presets() {
  static const std::vector<ControllerPreset> presets = make_hierarchy_presets();
  return presets;
}

const std::vector<ControllerPreset>& closed_form_presets() {
  static const std::vector<ControllerPreset> presets = make_closed_form_presets();
  return presets;
}

std::optional<ControllerPreset> find_preset(std::string_view name) {
  for (const auto* list : {&hierarchy_presets(), &closed_form_presets()}) {
    for (const ControllerPreset& p : *list) {
      if (p.name == name) {
        return p;
      }
    }
  }
  return std::nullopt;
}

Matrix resolve_weight(WeightChoice choice, const Matrix& mass) {
  switch (choice) {
    case WeightChoice::kZero:
      return Matrix::Zero(mass.rows(), mass.cols());
    case WeightChoice::kIdentity:
      return Matrix::Identity(mass.rows(), mass.cols());
    case WeightChoice::kMass:
      return mass;
  }
  return mass;
}

Vector two_level_command(const ControllerPreset& preset, const Matrix& j1, const Vector& u1,
                         const Vector& qd2, const Matrix& mass, ControlCommand* detail) {
  const Eigen::Index n = j1.cols();
  switch (preset.law) {
    case ControlLaw::kTradeoff:
      return two_task_tradeoff(j1, u1, qd2, resolve_weight(preset.energy, mass),
                               resolve_weight(preset.tracking, mass));
    case ControlLaw::kAlpha:
      return two_task_alpha(j1, u1, qd2, resolve_weight(preset.map, mass),
                            resolve_weight(preset.proj, mass), preset.alpha);
    default:
      break;
  }
  const std::vector<TaskOutput> tasks{{j1, u1, 1.0}, {Matrix::Identity(n, n), qd2, 0.0}};
  ControlCommand cmd = stack_command(preset, tasks, PriorityMatrix::strict_order(2), mass);
  if (cmd.singular.front()) {
    throw SingularityError("primary task is singular", 0.0);
  }
  Vector out = cmd.qd_desired;
  if (detail != nullptr) {
    *detail = std::move(cmd);
  }
  return out;
}

RunMetrics integrate_velocity_control(const ChainParams& chain, VelocityPolicy& policy,
                                      const Vector& q0, const IntegrationOptions& options) {
  if (!(options.dt > 0.0)) {
    throw InputError("integration step must be positive");
  }
  if (static_cast<std::size_t>(q0.size()) != chain.dof()) {
    throw InputError("initial configuration does not match the chain");
  }
  const bool with_comfort = options.comfort_config.size() > 0;
  if (with_comfort && options.comfort_config.size() != q0.size()) {
    throw InputError("comfort configuration does not match the chain");
  }
  const auto every = static_cast<std::size_t>(
      std::max(1.0, std::round(options.sample_interval / options.dt)));

  RunMetrics m;
  Vector q = q0;
  Vector previous;
  std::size_t k = 0;
  try {
    for (;; ++k) {
      const double t = static_cast<double>(k) * options.dt;
      if (policy.finished(t, q)) {
        m.converged = true;
        break;
      }
      if (t > options.max_duration + 1e-12) {
        break;
      }
      TraceRow row;
      Vector qd = policy.command(t, q, options.record_trace ? &row : nullptr);
      if (!qd.allFinite() || qd.lpNorm<Eigen::Infinity>() > options.command_cap) {
        throw NumericalError("joint velocity command exceeds the cap at t = " + std::to_string(t));
      }
      if (previous.size() > 0) {
        m.max_command_step =
            std::max(m.max_command_step, (qd - previous).lpNorm<Eigen::Infinity>());
      }
      if (k % every == 0) {
        m.kinetic_energy += kinetic_energy(chain, q, qd);
        if (with_comfort) {
          m.comfort_cost += comfort_cost(q, options.comfort_config, options.kappa);
        }
        ++m.samples;
      }
      if (options.record_trace) {
        row.t = t;
        row.q = q;
        row.qd = qd;
        m.trace.push_back(std::move(row));
      }
      q += qd * options.dt;
      previous = std::move(qd);
    }
  } catch (const NumericalError& e) {
    m.aborted = true;
    m.abort_reason = e.what();
  } catch (const SingularityError& e) {
    m.aborted = true;
    m.abort_reason = e.what();
  }
  m.steps = k;
  m.final_time = static_cast<double>(k) * options.dt;
  m.final_q = q;
  return m;
}

TrackingPolicy::TrackingPolicy(const ChainParams& chain, QuinticTrajectory trajectory,
                               ControllerPreset preset, Vector comfort, double kappa,
                               double feedback_gain)
    : chain_(&chain),
      trajectory_(std::move(trajectory)),
      preset_(std::move(preset)),
      comfort_(std::move(comfort)),
      kappa_(kappa),
      feedback_gain_(feedback_gain) {
  if (static_cast<std::size_t>(comfort_.size()) != chain.dof()) {
    throw InputError("comfort configuration does not match the chain");
  }
}

Vector TrackingPolicy::command(double t, const Vector& q, TraceRow* row) {
  const Eigen::Vector2d x = forward_kinematics(*chain_, q);
  last_u1_ = trajectory_.velocity(t) + feedback_gain_ * (trajectory_.position(t) - x);
  last_qd2_ = kappa_ * (comfort_ - q);
  const Matrix j1 = jacobian(*chain_, q);
  const Matrix mass = mass_matrix(*chain_, q);
  ControlCommand detail;
  Vector qd = two_level_command(preset_, j1, last_u1_, last_qd2_, mass, row ? &detail : nullptr);
  if (row != nullptr) {
    row->importances = {1.0, 0.0};
    row->priorities = PriorityMatrix::strict_order(2).entries();
    row->contributions = detail.contributions;
    if (row->contributions.empty()) {
      // closed-form laws: split into the primary mapping and the remainder
      const Vector primary = map_velocity(j1, mapping_weight(preset_, mass), last_u1_);
      row->contributions = {primary, qd - primary};
    }
    row->motion_computed = row->contributions.front();
    row->dyncon = (j1 * row->contributions.back()).norm();
  }
  return qd;
}

bool TrackingPolicy::finished(double t, const Vector&) const {
  return t > trajectory_.duration() + 1e-9;
}

StackPolicy::StackPolicy(const ChainParams& chain, WorldModel world, TaskParams params,
                         ControllerPreset preset, PriorityMode mode, double goal_tolerance)
    : chain_(&chain),
      world_(std::move(world)),
      params_(params),
      preset_(std::move(preset)),
      mode_(mode),
      goal_tolerance_(goal_tolerance) {
  params_.validate();
  if (preset_.law == ControlLaw::kTradeoff || preset_.law == ControlLaw::kAlpha) {
    throw InputError("preset " + preset_.name + " cannot drive the task stack");
  }
}

ControlCommand StackPolicy::cycle(const Vector& q, StackEvaluation* evaluation,
                                  PriorityMatrix* priorities) const {
  StackEvaluation eval = evaluate_task_stack(*chain_, q, world_, params_);
  if (mode_ == PriorityMode::kSnap) {
    for (TaskOutput& t : eval.tasks) {
      t.importance = t.importance >= kSnapThreshold ? 1.0 : 0.0;
    }
  }
  const auto& tk = eval.tasks;
  PriorityMatrix a = build_priority_matrix(
      tk[index_of(StackTask::kCollision)].importance, tk[index_of(StackTask::kJointLimits)].importance,
      tk[index_of(StackTask::kMotion)].importance, tk[index_of(StackTask::kManipulability)].importance);
  ControlCommand cmd = stack_command(preset_, eval.tasks, a, mass_matrix(*chain_, q));
  if (evaluation != nullptr) {
    *evaluation = std::move(eval);
  }
  if (priorities != nullptr) {
    *priorities = std::move(a);
  }
  return cmd;
}

Vector StackPolicy::command(double, const Vector& q, TraceRow* row) {
  if (row == nullptr) {
    return cycle(q).qd_desired;
  }
  StackEvaluation eval;
  PriorityMatrix a = PriorityMatrix::strict_order(1);
  ControlCommand cmd = cycle(q, &eval, &a);

  const TaskOutput& motion = eval.tasks[index_of(StackTask::kMotion)];
  row->importances.clear();
  for (const TaskOutput& t : eval.tasks) {
    row->importances.push_back(t.importance);
  }
  row->priorities = a.entries();
  row->contributions = cmd.contributions;
  const Matrix mass = mass_matrix(*chain_, q);
  try {
    row->motion_computed =
        weighted_pseudo_inverse(motion.jacobian, mapping_weight(preset_, mass)) * motion.target;
  } catch (const SingularityError&) {
    row->motion_computed = Vector::Zero(q.size());
  }
  row->dyncon =
      (motion.jacobian * cmd.contributions[index_of(StackTask::kManipulability)]).norm();
  row->min_distance = eval.closest ? eval.closest->distance : std::numeric_limits<double>::infinity();
  return cmd.qd_desired;
}

bool StackPolicy::finished(double, const Vector& q) const {
  return (forward_kinematics(*chain_, q) - world_.goal).norm() < goal_tolerance_;
}

}  // namespace hierctl
