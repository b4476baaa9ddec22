#pragma once

#include <span>
#include <vector>

#include "hierctl/linalg.hpp"
#include "hierctl/tasks.hpp"

namespace hierctl {

// D (energy weight), E (tracking weight) and W = D + 2E, fixed at
// construction.
class ControlWeights {
 public:
  ControlWeights(Matrix energy, Matrix tracking);

  const Matrix& energy() const { return energy_; }
  const Matrix& tracking() const { return tracking_; }
  const Matrix& combined() const { return combined_; }

 private:
  Matrix energy_;
  Matrix tracking_;
  Matrix combined_;
};

// a_ij is the priority of task j over task i. Zero diagonal,
// a_ij + a_ji = 1 off the diagonal.
class PriorityMatrix {
 public:
  explicit PriorityMatrix(Matrix entries);

  Eigen::Index size() const { return entries_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  const Matrix& entries() const { return entries_; }

  // Static hierarchy: task i fully above task j whenever i < j.
  static PriorityMatrix strict_order(Eigen::Index tasks);

 private:
  Matrix entries_;
};

// Importance-driven priorities for the (Coll, Jla, Motion, Mnp) stack.
PriorityMatrix build_priority_matrix(double eta_coll, double eta_jla, double eta_motion,
                                     double eta_mnp);

// Single-task mappings.
Vector map_velocity(const Matrix& jacobian, const Matrix& weight, const Vector& xd);
Vector map_acceleration(const Matrix& jacobian, const Matrix& jacobian_rate, const Matrix& weight,
                        const Vector& xdd, const Vector& qd);
Vector map_acceleration_energy_optimal(const Matrix& jacobian, const Matrix& jacobian_rate,
                                       const Matrix& weight, const Matrix& weight_rate,
                                       const Vector& xdd, const Vector& qd);
Vector map_torque(const Matrix& jacobian, const Vector& force);

// Energy / tracking trade-off for a primary task and a secondary joint
// velocity: J#_W1 xd1 + (I - J#_W1 J1) W1^-1 2E qd2 with W1 = D + 2E.
Vector two_task_tradeoff(const Matrix& j1, const Vector& xd1, const Vector& qd2, const Matrix& energy,
                         const Matrix& tracking);
// J#_Wmap xd1 + alpha (I - J#_Wproj J1) qd2.
Vector two_task_alpha(const Matrix& j1, const Vector& xd1, const Vector& qd2, const Matrix& w_map,
                      const Matrix& w_proj, double alpha);

// Stacked Jacobian of the other tasks, rows sorted by descending priority,
// with the priority of each row's task.
struct AugmentedRows {
  Matrix jacobian;
  Vector priorities;
};

// Rows of every task j != k with a_kj > 0; ties keep task order.
AugmentedRows arrange_augmented_jacobian(std::span<const Matrix> jacobians,
                                         const PriorityMatrix& priorities, Eigen::Index task);

// Velocity-control projector L (I - Q A_sr Q^T) L^-1 with L L^T = W^-1 and Q
// an ordered orthonormal basis of the rows of J_aug L. Rows whose residual
// falls below 1e-10 are dependent and dropped.
Matrix dyn_ghc_projector(const AugmentedRows& rows, const Matrix& weight);
// Same with L = I.
Matrix ghc_projector(const AugmentedRows& rows);

struct HierarchyInput {
  std::vector<TaskOutput> tasks;
  ControlWeights weights;
};

struct ControlCommand {
  Vector qd_desired;
  std::vector<Vector> contributions;
  std::vector<Matrix> projectors;
  std::vector<bool> singular;  // task mapping failed; contribution zeroed
};

// Energy-aware hierarchical velocity control of N tasks.
ControlCommand hierarchical_control(const HierarchyInput& input, const PriorityMatrix& priorities);
// Transposed-projector DynGHC with weight W (no energy interpolation).
ControlCommand dyn_ghc_control(std::span<const TaskOutput> tasks, const PriorityMatrix& priorities,
                               const Matrix& weight);
// Transposed-projector GHC (W = I).
ControlCommand ghc_control(std::span<const TaskOutput> tasks, const PriorityMatrix& priorities);

enum class DynConMode { kTorque, kVelocity };

// torque: ||J M^-1 N tau||, velocity/acceleration: ||J N qdd||.
double dyncon_metric(DynConMode mode, const Matrix& j_high, const Matrix& projector,
                     const Vector& command, const Matrix& mass);

}  // namespace hierctl
