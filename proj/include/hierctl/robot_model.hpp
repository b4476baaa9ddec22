#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "hierctl/linalg.hpp"

namespace hierctl {

struct JointLimit {
  double lower;
  double upper;
};

// Planar serial chain, revolute joints, one point mass per link.
struct ChainParams {
  std::vector<double> link_lengths;   // m
  std::vector<double> point_masses;   // kg
  std::vector<double> com_ratios;     // fraction of link length to the point mass
  Eigen::Vector2d gravity{0.0, -9.81};
  std::vector<JointLimit> joint_limits;  // rad

  std::size_t dof() const { return link_lengths.size(); }
  double reach() const;
  // Throws InputError on any violated invariant.
  void validate() const;

  // n identical links with the mass at the link midpoint.
  static ChainParams uniform(std::size_t links, double length, double mass, double limit);
};

// 4 links, 0.5 m, 1 kg, +-170 deg.
ChainParams default_benchmark_chain();
// 7 links for timing runs (matches the hardware DoF).
ChainParams seven_dof_chain();

// A point on the chain: `ratio` in [0,1] along link `link` (0-based).
struct BodyPoint {
  std::size_t link = 0;
  double ratio = 1.0;
};

BodyPoint end_effector(const ChainParams& params);
BodyPoint mass_point(const ChainParams& params, std::size_t link);

struct JointState {
  Vector q;   // rad
  Vector qd;  // rad/s
};

struct TaskSpaceDynamics {
  Matrix mass;       // (J M^-1 J^T)^-1
  Vector coriolis;   // Mbar J M^-1 C qd - Mbar Jdot qd
  Vector gravity;    // Mbar J M^-1 g
};

Eigen::Vector2d point_position(const ChainParams& params, const Vector& q, BodyPoint point);
Eigen::Vector2d forward_kinematics(const ChainParams& params, const Vector& q);
// Base, every joint, and the end effector (n + 1 points).
std::vector<Eigen::Vector2d> joint_positions(const ChainParams& params, const Vector& q);

// Translational 2 x n Jacobian of a body point; distal columns are zero.
Matrix jacobian(const ChainParams& params, const Vector& q, BodyPoint point);
Matrix jacobian(const ChainParams& params, const Vector& q);

Matrix jacobian_time_derivative(const ChainParams& params, const Vector& q, const Vector& qd,
                                BodyPoint point);
Matrix jacobian_time_derivative(const ChainParams& params, const Vector& q, const Vector& qd);

// sum_i m_i J_i^T J_i over the point-mass Jacobians.
Matrix mass_matrix(const ChainParams& params, const Vector& q);
// dM/dq_i for every joint, central differences with h = 1e-6.
std::vector<Matrix> mass_matrix_gradient(const ChainParams& params, const Vector& q);
// sum_i dM/dq_i qd_i.
Matrix mass_matrix_time_derivative(const ChainParams& params, const Vector& q, const Vector& qd);
double kinetic_energy(const ChainParams& params, const Vector& q, const Vector& qd);

// C(q, qd) qd from the Christoffel symbols of M.
Vector coriolis_vector(const ChainParams& params, const Vector& q, const Vector& qd);
double potential_energy(const ChainParams& params, const Vector& q);
// dU/dq.
Vector gravity_vector(const ChainParams& params, const Vector& q);

TaskSpaceDynamics task_space_dynamics(const ChainParams& params, const Vector& q, const Vector& qd,
                                      const Matrix& task_jacobian, const Matrix& task_jacobian_rate);

// qdd = M^-1 (tau - C qd - g).
Vector forward_dynamics(const ChainParams& params, const Vector& q, const Vector& qd,
                        const Vector& tau);

}  // namespace hierctl
