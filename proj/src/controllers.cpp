#include "hierctl/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hierctl/errors.hpp"

namespace hierctl {
namespace {

constexpr double kDependentRow = 1e-10;
constexpr double kPriorityTolerance = 1e-12;

void require_importance(double eta, const char* name) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw InputError(std::string(name) + " must lie in [0, 1]");
  }
}

// Ordered Gram-Schmidt (two passes) over the rows of `rows`; dependent rows
// are skipped. Returns the basis as columns and each column's priority.
void ordered_basis(const Matrix& rows, const Vector& priorities, Matrix& basis, Vector& weights) {
  const Eigen::Index n = rows.cols();
  basis.resize(n, std::min(rows.rows(), n));
  weights.resize(basis.cols());
  Eigen::Index count = 0;
  for (Eigen::Index r = 0; r < rows.rows() && count < n; ++r) {
    Vector v = rows.row(r).transpose();
    for (int pass = 0; pass < 2; ++pass) {
      if (count > 0) {
        const auto done = basis.leftCols(count);
        v -= done * (done.transpose() * v);
      }
    }
    const double norm = v.norm();
    if (norm < kDependentRow) {
      continue;
    }
    basis.col(count) = v / norm;
    weights(count) = priorities(r);
    ++count;
  }
  basis.conservativeResize(n, count);
  weights.conservativeResize(count);
}

// Rows of J that are identically zero carry no constraint (inactive
// selection rows of the joint limit task).
Matrix active_rows(const Matrix& jacobian, const Vector& target, Vector& active_target) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < jacobian.rows(); ++r) {
    if (jacobian.row(r).squaredNorm() > 0.0) {
      keep.push_back(r);
    }
  }
  Matrix out(static_cast<Eigen::Index>(keep.size()), jacobian.cols());
  active_target.resize(out.rows());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = jacobian.row(keep[i]);
    active_target(static_cast<Eigen::Index>(i)) = target(keep[i]);
  }
  return out;
}

void check_tasks(std::span<const TaskOutput> tasks, const PriorityMatrix& priorities) {
  if (tasks.empty()) {
    throw InputError("hierarchy needs at least one task");
  }
  if (priorities.size() != static_cast<Eigen::Index>(tasks.size())) {
    throw InputError("priority matrix size does not match task count");
  }
  const Eigen::Index n = tasks.front().jacobian.cols();
  for (const TaskOutput& t : tasks) {
    if (t.jacobian.cols() != n || t.jacobian.rows() != t.target.size()) {
      throw InputError("task jacobians must share the column count and match their targets");
    }
    require_importance(t.importance, "task importance");
  }
}

// Cholesky data for the weighted projector; identity when `weight` is null.
struct ProjectorBasis {
  Matrix lower;          // L with L L^T = W^-1
  Matrix lower_inverse;  // L^-1
};

Matrix projector_from_rows(const AugmentedRows& rows, const ProjectorBasis* chol, Eigen::Index n) {
  if (rows.jacobian.rows() == 0) {
    return Matrix::Identity(n, n);
  }
  Matrix basis;
  Vector weights;
  if (chol != nullptr) {
    ordered_basis(rows.jacobian * chol->lower, rows.priorities, basis, weights);
    // L (I - Q A Q^T) L^-1 = I - (L Q) A (Q^T L^-1)
    const Matrix lq = chol->lower * basis;
    const Matrix qt_linv = basis.transpose() * chol->lower_inverse;
    return Matrix::Identity(n, n) - lq * weights.asDiagonal() * qt_linv;
  }
  ordered_basis(rows.jacobian, rows.priorities, basis, weights);
  return Matrix::Identity(n, n) - basis * weights.asDiagonal() * basis.transpose();
}

ProjectorBasis make_projector_basis(const WeightFactor& factor) {
  ProjectorBasis out;
  out.lower = cholesky_lower(factor.inverse()).lower;
  const Eigen::Index n = out.lower.rows();
  out.lower_inverse = out.lower.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
  return out;
}

// Shared body of the three hierarchical controllers. `weight` null means
// W = I with unweighted projectors; `gain` null means K = I for every task.
ControlCommand run_hierarchy(std::span<const TaskOutput> tasks, const PriorityMatrix& priorities,
                             const Matrix* weight, const Matrix* gain) {
  check_tasks(tasks, priorities);
  const Eigen::Index n = tasks.front().jacobian.cols();
  const auto count = static_cast<Eigen::Index>(tasks.size());

  const WeightFactor factor(weight != nullptr ? *weight : Matrix::Identity(n, n));
  ProjectorBasis chol;
  if (weight != nullptr) {
    chol = make_projector_basis(factor);
  }

  std::vector<Matrix> jacobians;
  jacobians.reserve(tasks.size());
  for (const TaskOutput& t : tasks) {
    jacobians.push_back(t.jacobian);
  }

  ControlCommand cmd;
  cmd.qd_desired = Vector::Zero(n);
  cmd.contributions.reserve(tasks.size());
  cmd.projectors.reserve(tasks.size());
  cmd.singular.assign(tasks.size(), false);

  for (Eigen::Index k = 0; k < count; ++k) {
    const TaskOutput& task = tasks[static_cast<std::size_t>(k)];
    const AugmentedRows rows = arrange_augmented_jacobian(jacobians, priorities, k);
    cmd.projectors.push_back(projector_from_rows(rows, weight != nullptr ? &chol : nullptr, n));

    Vector mapped = Vector::Zero(n);
    Vector active_target;
    const Matrix active = active_rows(task.jacobian, task.target, active_target);
    if (active.rows() > 0) {
      try {
        mapped = weighted_pseudo_inverse(active, factor) * active_target;
      } catch (const SingularityError&) {
        cmd.singular[static_cast<std::size_t>(k)] = true;
      }
    }
    if (gain != nullptr) {
      // K = eta I + (1 - eta) (D + 2E)^-1 2E
      mapped = task.importance * mapped + (1.0 - task.importance) * (*gain * mapped);
    }
    cmd.contributions.push_back(cmd.projectors.back() * mapped);
  }
  for (const Vector& c : cmd.contributions) {
    cmd.qd_desired += c;
  }
  return cmd;
}

}  // namespace

ControlWeights::ControlWeights(Matrix energy, Matrix tracking)
    : energy_(std::move(energy)), tracking_(std::move(tracking)) {
  if (energy_.rows() != tracking_.rows() || energy_.cols() != tracking_.cols()) {
    throw InputError("D and E must have the same shape");
  }
  combined_ = energy_ + 2.0 * tracking_;
  [[maybe_unused]] const WeightFactor check(combined_);
}

PriorityMatrix::PriorityMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw InputError("priority matrix must be square and non-empty");
  }
  for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
    if (entries_(i, i) != 0.0) {
      throw InputError("priority matrix diagonal must be zero");
    }
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
      const double a = entries_(i, j);
      if (!(a >= 0.0 && a <= 1.0)) {
        throw InputError("priorities must lie in [0, 1]");
      }
      if (i != j && std::abs(a + entries_(j, i) - 1.0) > kPriorityTolerance) {
        throw InputError("priorities a_ij and a_ji must sum to one");
      }
    }
  }
}

PriorityMatrix PriorityMatrix::strict_order(Eigen::Index tasks) {
  Matrix a = Matrix::Zero(tasks, tasks);
  for (Eigen::Index i = 0; i < tasks; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      a(i, j) = 1.0;
    }
  }
  return PriorityMatrix(std::move(a));
}

PriorityMatrix build_priority_matrix(double eta_coll, double eta_jla, double eta_motion,
                                     double eta_mnp) {
  require_importance(eta_coll, "eta_coll");
  require_importance(eta_jla, "eta_jla");
  require_importance(eta_motion, "eta_motion");
  require_importance(eta_mnp, "eta_mnp");
  // eta_mnp never enters: Mnp sits in the last row.
  Matrix a(4, 4);
  a << 0.0, 1.0 - eta_coll, 1.0 - eta_coll, 1.0 - eta_coll,
       eta_coll, 0.0, 1.0 - eta_jla, 1.0 - eta_jla,
       eta_coll, eta_jla, 0.0, 1.0 - eta_motion,
       eta_coll, eta_jla, eta_motion, 0.0;
  return PriorityMatrix(std::move(a));
}

Vector map_velocity(const Matrix& jacobian, const Matrix& weight, const Vector& xd) {
  return weighted_pseudo_inverse(jacobian, weight) * xd;
}

Vector map_acceleration(const Matrix& jacobian, const Matrix& jacobian_rate, const Matrix& weight,
                        const Vector& xdd, const Vector& qd) {
  return weighted_pseudo_inverse(jacobian, weight) * (xdd - jacobian_rate * qd);
}

Vector map_acceleration_energy_optimal(const Matrix& jacobian, const Matrix& jacobian_rate,
                                       const Matrix& weight, const Matrix& weight_rate,
                                       const Vector& xdd, const Vector& qd) {
  const Matrix pinv = weighted_pseudo_inverse(jacobian, weight);
  const Matrix pinv_rate = pseudo_inverse_time_derivative(jacobian, jacobian_rate, weight, weight_rate);
  return pinv * xdd + pinv_rate * (jacobian * qd);
}

Vector map_torque(const Matrix& jacobian, const Vector& force) {
  if (jacobian.rows() != force.size()) {
    throw InputError("force does not match the task dimension");
  }
  return jacobian.transpose() * force;
}

Vector two_task_tradeoff(const Matrix& j1, const Vector& xd1, const Vector& qd2, const Matrix& energy,
                         const Matrix& tracking) {
  const ControlWeights weights(energy, tracking);
  const WeightFactor factor(weights.combined());
  const Matrix pinv = weighted_pseudo_inverse(j1, factor);
  const Eigen::Index n = j1.cols();
  const Matrix projector = Matrix::Identity(n, n) - pinv * j1;
  return pinv * xd1 + projector * factor.solve(2.0 * tracking * qd2);
}

Vector two_task_alpha(const Matrix& j1, const Vector& xd1, const Vector& qd2, const Matrix& w_map,
                      const Matrix& w_proj, double alpha) {
  return map_velocity(j1, w_map, xd1) + alpha * (nullspace_projector_velocity(j1, w_proj) * qd2);
}

AugmentedRows arrange_augmented_jacobian(std::span<const Matrix> jacobians,
                                         const PriorityMatrix& priorities, Eigen::Index task) {
  std::vector<Eigen::Index> order;
  Eigen::Index rows = 0;
  for (Eigen::Index j = 0; j < priorities.size(); ++j) {
    if (j != task && priorities(task, j) > 0.0) {
      order.push_back(j);
      rows += jacobians[static_cast<std::size_t>(j)].rows();
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return priorities(task, a) > priorities(task, b);
  });

  const Eigen::Index n = jacobians.front().cols();
  AugmentedRows out{Matrix(rows, n), Vector(rows)};
  Eigen::Index at = 0;
  for (Eigen::Index j : order) {
    const Matrix& jac = jacobians[static_cast<std::size_t>(j)];
    out.jacobian.middleRows(at, jac.rows()) = jac;
    out.priorities.segment(at, jac.rows()).setConstant(priorities(task, j));
    at += jac.rows();
  }
  return out;
}

Matrix dyn_ghc_projector(const AugmentedRows& rows, const Matrix& weight) {
  const WeightFactor factor(weight);
  const ProjectorBasis chol = make_projector_basis(factor);
  return projector_from_rows(rows, &chol, weight.rows());
}

Matrix ghc_projector(const AugmentedRows& rows) {
  return projector_from_rows(rows, nullptr, rows.jacobian.cols());
}

ControlCommand hierarchical_control(const HierarchyInput& input, const PriorityMatrix& priorities) {
  const ControlWeights& w = input.weights;
  const WeightFactor factor(w.combined());
  const Matrix gain = factor.solve(2.0 * w.tracking());
  return run_hierarchy(input.tasks, priorities, &w.combined(), &gain);
}

ControlCommand dyn_ghc_control(std::span<const TaskOutput> tasks, const PriorityMatrix& priorities,
                               const Matrix& weight) {
  return run_hierarchy(tasks, priorities, &weight, nullptr);
}

ControlCommand ghc_control(std::span<const TaskOutput> tasks, const PriorityMatrix& priorities) {
  return run_hierarchy(tasks, priorities, nullptr, nullptr);
}

double dyncon_metric(DynConMode mode, const Matrix& j_high, const Matrix& projector,
                     const Vector& command, const Matrix& mass) {
  const Vector projected = projector * command;
  if (mode == DynConMode::kTorque) {
    return (j_high * mass.llt().solve(projected)).norm();
  }
  return (j_high * projected).norm();
}

}  // namespace hierctl
