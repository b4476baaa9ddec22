#pragma once

#include <Eigen/Dense>

namespace hierctl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// J W^-1 J^T is treated as singular beyond this condition number.
inline constexpr double kSingularConditionLimit = 1e12;

struct CholeskyFactor {
  Matrix lower;
};

struct ThinQrFactor {
  Matrix q;  // orthonormal columns
  Matrix r;  // upper triangular, non-negative diagonal
};

// Cached factorization of a symmetric positive definite weighting matrix.
// Construction validates symmetry and definiteness and throws InputError
// otherwise.
class WeightFactor {
 public:
  explicit WeightFactor(const Matrix& weight);

  Eigen::Index dim() const { return inverse_.rows(); }
  const Matrix& inverse() const { return inverse_; }
  Matrix solve(const Matrix& rhs) const { return llt_.solve(rhs); }

 private:
  Eigen::LLT<Matrix> llt_;
  Matrix inverse_;
};

// W^-1 J^T (J W^-1 J^T)^-1. Throws SingularityError when J W^-1 J^T is
// rank deficient or its condition number exceeds kSingularConditionLimit.
Matrix weighted_pseudo_inverse(const Matrix& jacobian, const Matrix& weight);
Matrix weighted_pseudo_inverse(const Matrix& jacobian, const WeightFactor& weight);

// d/dt of weighted_pseudo_inverse by the product rule on the closed form.
Matrix pseudo_inverse_time_derivative(const Matrix& jacobian, const Matrix& jacobian_rate,
                                      const Matrix& weight, const Matrix& weight_rate);

// N = I - J#_W J (velocity and acceleration control).
Matrix nullspace_projector_velocity(const Matrix& jacobian, const Matrix& weight);
// N^T (torque control).
Matrix nullspace_projector_torque(const Matrix& jacobian, const Matrix& weight);

CholeskyFactor cholesky_lower(const Matrix& spd);
ThinQrFactor thin_qr(const Matrix& a);

// Throws InputError unless every entry is finite.
void require_finite(const Matrix& m, const char* name);

}  // namespace hierctl
