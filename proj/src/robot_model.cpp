#include "hierctl/robot_model.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "hierctl/errors.hpp"

namespace hierctl {
namespace {

constexpr double kDiffStep = 1e-6;

void require_dof(const ChainParams& params, const Vector& v, const char* name) {
  if (static_cast<std::size_t>(v.size()) != params.dof()) {
    throw InputError(std::string(name) + " has " + std::to_string(v.size()) +
                     " entries, chain has " + std::to_string(params.dof()) + " joints");
  }
  if (!v.allFinite()) {
    throw InputError(std::string(name) + " has non-finite entries");
  }
}

void require_point(const ChainParams& params, BodyPoint point) {
  if (point.link >= params.dof()) {
    throw InputError("body point refers to link " + std::to_string(point.link) + " of a " +
                     std::to_string(params.dof()) + "-link chain");
  }
  if (!(point.ratio >= 0.0 && point.ratio <= 1.0)) {
    throw InputError("body point ratio must lie in [0, 1]");
  }
}

// Lever length of link i when evaluating `point`.
double lever(const ChainParams& params, BodyPoint point, std::size_t i) {
  return i < point.link ? params.link_lengths[i] : point.ratio * params.link_lengths[i];
}

}  // namespace

double ChainParams::reach() const {
  return std::accumulate(link_lengths.begin(), link_lengths.end(), 0.0);
}

void ChainParams::validate() const {
  const std::size_t n = dof();
  if (n == 0) {
    throw InputError("chain needs at least one link");
  }
  if (point_masses.size() != n || com_ratios.size() != n || joint_limits.size() != n) {
    throw InputError("chain parameter lists must all have one entry per link");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(link_lengths[i] > 0.0) || !std::isfinite(link_lengths[i])) {
      throw InputError("link lengths must be positive");
    }
    if (!(point_masses[i] > 0.0) || !std::isfinite(point_masses[i])) {
      throw InputError("point masses must be positive");
    }
    if (!(com_ratios[i] > 0.0 && com_ratios[i] <= 1.0)) {
      throw InputError("com ratios must lie in (0, 1]");
    }
    if (!(joint_limits[i].lower < joint_limits[i].upper)) {
      throw InputError("joint limit " + std::to_string(i) + " has min >= max");
    }
  }
  if (!gravity.allFinite()) {
    throw InputError("gravity must be finite");
  }
}

ChainParams ChainParams::uniform(std::size_t links, double length, double mass, double limit) {
  ChainParams p;
  p.link_lengths.assign(links, length);
  p.point_masses.assign(links, mass);
  p.com_ratios.assign(links, 0.5);
  p.joint_limits.assign(links, JointLimit{-limit, limit});
  return p;
}

ChainParams default_benchmark_chain() {
  return ChainParams::uniform(4, 0.5, 1.0, 170.0 * std::numbers::pi / 180.0);
}

ChainParams seven_dof_chain() {
  return ChainParams::uniform(7, 0.3, 1.0, 170.0 * std::numbers::pi / 180.0);
}

BodyPoint end_effector(const ChainParams& params) { return {params.dof() - 1, 1.0}; }

BodyPoint mass_point(const ChainParams& params, std::size_t link) {
  return {link, params.com_ratios.at(link)};
}

Eigen::Vector2d point_position(const ChainParams& params, const Vector& q, BodyPoint point) {
  require_dof(params, q, "q");
  require_point(params, point);
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  double angle = 0.0;
  for (std::size_t i = 0; i <= point.link; ++i) {
    angle += q(static_cast<Eigen::Index>(i));
    const double l = lever(params, point, i);
    p += l * Eigen::Vector2d(std::cos(angle), std::sin(angle));
  }
  return p;
}

Eigen::Vector2d forward_kinematics(const ChainParams& params, const Vector& q) {
  return point_position(params, q, end_effector(params));
}

std::vector<Eigen::Vector2d> joint_positions(const ChainParams& params, const Vector& q) {
  require_dof(params, q, "q");
  std::vector<Eigen::Vector2d> out;
  out.reserve(params.dof() + 1);
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  out.push_back(p);
  double angle = 0.0;
  for (std::size_t i = 0; i < params.dof(); ++i) {
    angle += q(static_cast<Eigen::Index>(i));
    p += params.link_lengths[i] * Eigen::Vector2d(std::cos(angle), std::sin(angle));
    out.push_back(p);
  }
  return out;
}

Matrix jacobian(const ChainParams& params, const Vector& q, BodyPoint point) {
  require_dof(params, q, "q");
  require_point(params, point);
  const auto n = static_cast<Eigen::Index>(params.dof());
  Matrix jac = Matrix::Zero(2, n);
  // Column j sums l_i (-sin th_i, cos th_i) over links i >= j up to the point.
  std::vector<Eigen::Vector2d> segment(point.link + 1);
  double angle = 0.0;
  for (std::size_t i = 0; i <= point.link; ++i) {
    angle += q(static_cast<Eigen::Index>(i));
    segment[i] = lever(params, point, i) * Eigen::Vector2d(-std::sin(angle), std::cos(angle));
  }
  Eigen::Vector2d tail = Eigen::Vector2d::Zero();
  for (std::size_t i = point.link + 1; i-- > 0;) {
    tail += segment[i];
    jac.col(static_cast<Eigen::Index>(i)) = tail;
  }
  return jac;
}

Matrix jacobian(const ChainParams& params, const Vector& q) {
  return jacobian(params, q, end_effector(params));
}

Matrix jacobian_time_derivative(const ChainParams& params, const Vector& q, const Vector& qd,
                                BodyPoint point) {
  require_dof(params, q, "q");
  require_dof(params, qd, "qd");
  require_point(params, point);
  const auto n = static_cast<Eigen::Index>(params.dof());
  Matrix rate = Matrix::Zero(2, n);
  std::vector<Eigen::Vector2d> segment(point.link + 1);
  double angle = 0.0;
  double angle_rate = 0.0;
  for (std::size_t i = 0; i <= point.link; ++i) {
    angle += q(static_cast<Eigen::Index>(i));
    angle_rate += qd(static_cast<Eigen::Index>(i));
    segment[i] = -lever(params, point, i) * angle_rate *
                 Eigen::Vector2d(std::cos(angle), std::sin(angle));
  }
  Eigen::Vector2d tail = Eigen::Vector2d::Zero();
  for (std::size_t i = point.link + 1; i-- > 0;) {
    tail += segment[i];
    rate.col(static_cast<Eigen::Index>(i)) = tail;
  }
  return rate;
}

Matrix jacobian_time_derivative(const ChainParams& params, const Vector& q, const Vector& qd) {
  return jacobian_time_derivative(params, q, qd, end_effector(params));
}

Matrix mass_matrix(const ChainParams& params, const Vector& q) {
  const auto n = static_cast<Eigen::Index>(params.dof());
  Matrix mass = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < params.dof(); ++i) {
    const Matrix ji = jacobian(params, q, mass_point(params, i));
    mass.noalias() += params.point_masses[i] * ji.transpose() * ji;
  }
  return 0.5 * (mass + mass.transpose());
}

namespace {

using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Extended precision keeps the central difference above the round-off floor.
LongMatrix mass_matrix_extended(const ChainParams& params, const LongVector& q) {
  const auto n = static_cast<Eigen::Index>(params.dof());
  LongMatrix mass = LongMatrix::Zero(n, n);
  for (std::size_t k = 0; k < params.dof(); ++k) {
    const BodyPoint point = mass_point(params, k);
    LongMatrix jac = LongMatrix::Zero(2, n);
    long double angle = 0.0L;
    std::vector<Eigen::Matrix<long double, 2, 1>> segment(point.link + 1);
    for (std::size_t i = 0; i <= point.link; ++i) {
      angle += q(static_cast<Eigen::Index>(i));
      const long double l = lever(params, point, i);
      segment[i] << -l * std::sin(angle), l * std::cos(angle);
    }
    Eigen::Matrix<long double, 2, 1> tail = Eigen::Matrix<long double, 2, 1>::Zero();
    for (std::size_t i = point.link + 1; i-- > 0;) {
      tail += segment[i];
      jac.col(static_cast<Eigen::Index>(i)) = tail;
    }
    mass.noalias() += static_cast<long double>(params.point_masses[k]) * jac.transpose() * jac;
  }
  return mass;
}

}  // namespace

std::vector<Matrix> mass_matrix_gradient(const ChainParams& params, const Vector& q) {
  require_dof(params, q, "q");
  std::vector<Matrix> out;
  out.reserve(params.dof());
  const LongVector base = q.cast<long double>();
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    LongVector plus = base;
    LongVector minus = base;
    plus(i) += kDiffStep;
    minus(i) -= kDiffStep;
    const LongMatrix diff =
        (mass_matrix_extended(params, plus) - mass_matrix_extended(params, minus)) / (plus(i) - minus(i));
    const Matrix slice = diff.cast<double>();
    out.push_back(0.5 * (slice + slice.transpose()));
  }
  return out;
}

Matrix mass_matrix_time_derivative(const ChainParams& params, const Vector& q, const Vector& qd) {
  require_dof(params, qd, "qd");
  const auto grad = mass_matrix_gradient(params, q);
  Matrix rate = Matrix::Zero(q.size(), q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    rate += grad[static_cast<std::size_t>(i)] * qd(i);
  }
  return rate;
}

double kinetic_energy(const ChainParams& params, const Vector& q, const Vector& qd) {
  require_dof(params, qd, "qd");
  return 0.5 * qd.dot(mass_matrix(params, q) * qd);
}

Vector coriolis_vector(const ChainParams& params, const Vector& q, const Vector& qd) {
  require_dof(params, qd, "qd");
  const auto grad = mass_matrix_gradient(params, q);
  const Eigen::Index n = q.size();
  // (C qd)_i = sum_jk (dM_ij/dq_k - 1/2 dM_jk/dq_i) qd_j qd_k
  Matrix mdot = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    mdot += grad[static_cast<std::size_t>(k)] * qd(k);
  }
  Vector out = mdot * qd;
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i) -= 0.5 * qd.dot(grad[static_cast<std::size_t>(i)] * qd);
  }
  return out;
}

double potential_energy(const ChainParams& params, const Vector& q) {
  double u = 0.0;
  for (std::size_t i = 0; i < params.dof(); ++i) {
    u -= params.point_masses[i] * params.gravity.dot(point_position(params, q, mass_point(params, i)));
  }
  return u;
}

Vector gravity_vector(const ChainParams& params, const Vector& q) {
  require_dof(params, q, "q");
  Vector g = Vector::Zero(q.size());
  for (std::size_t i = 0; i < params.dof(); ++i) {
    g -= params.point_masses[i] * jacobian(params, q, mass_point(params, i)).transpose() *
         params.gravity;
  }
  return g;
}

TaskSpaceDynamics task_space_dynamics(const ChainParams& params, const Vector& q, const Vector& qd,
                                      const Matrix& task_jacobian, const Matrix& task_jacobian_rate) {
  const Matrix mass = mass_matrix(params, q);
  // J#_M = M^-1 J^T Mbar, so Mbar J M^-1 = (J#_M)^T.
  const Matrix pinv = weighted_pseudo_inverse(task_jacobian, mass);
  if (task_jacobian_rate.rows() != task_jacobian.rows() ||
      task_jacobian_rate.cols() != task_jacobian.cols()) {
    throw InputError("task jacobian rate does not match task jacobian");
  }
  TaskSpaceDynamics out;
  const Matrix dyn_pinv_t = pinv.transpose();
  out.mass = dyn_pinv_t * mass * pinv;
  out.mass = 0.5 * (out.mass + out.mass.transpose());
  out.coriolis = dyn_pinv_t * coriolis_vector(params, q, qd) - out.mass * task_jacobian_rate * qd;
  out.gravity = dyn_pinv_t * gravity_vector(params, q);
  return out;
}

Vector forward_dynamics(const ChainParams& params, const Vector& q, const Vector& qd,
                        const Vector& tau) {
  require_dof(params, tau, "tau");
  const Matrix mass = mass_matrix(params, q);
  return mass.llt().solve(tau - coriolis_vector(params, q, qd) - gravity_vector(params, q));
}

}  // namespace hierctl
