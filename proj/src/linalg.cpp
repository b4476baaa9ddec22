#include "hierctl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hierctl/errors.hpp"

namespace hierctl {
namespace {

void require_square_symmetric(const Matrix& w) {
  if (w.rows() == 0 || w.rows() != w.cols()) {
    throw InputError("weighting matrix must be square and non-empty");
  }
  require_finite(w, "weighting matrix");
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InputError("weighting matrix is not symmetric");
  }
}

struct GramInverse {
  Matrix winv_jt;  // W^-1 J^T
  Matrix inverse;  // (J W^-1 J^T)^-1
};

GramInverse invert_gram(const Matrix& jacobian, const WeightFactor& weight) {
  if (jacobian.rows() == 0 || jacobian.cols() != weight.dim()) {
    throw InputError("jacobian has " + std::to_string(jacobian.cols()) +
                     " columns, weighting matrix is " + std::to_string(weight.dim()) + " wide");
  }
  if (jacobian.rows() > jacobian.cols()) {
    throw InputError("jacobian has more rows than columns");
  }
  require_finite(jacobian, "jacobian");

  GramInverse out;
  out.winv_jt = weight.solve(jacobian.transpose());
  Matrix gram = jacobian * out.winv_jt;
  gram = 0.5 * (gram + gram.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(gram.rows() - 1);
  if (!(lo > 0.0) || hi > kSingularConditionLimit * lo) {
    const double sigma = std::sqrt(std::max(lo, 0.0));
    throw SingularityError("task mapping is singular (smallest singular value " +
                               std::to_string(sigma) + ")",
                           sigma);
  }
  out.inverse = gram.llt().solve(Matrix::Identity(gram.rows(), gram.cols()));
  return out;
}

}  // namespace

void require_finite(const Matrix& m, const char* name) {
  if (!m.allFinite()) {
    throw InputError(std::string(name) + " has non-finite entries");
  }
}

WeightFactor::WeightFactor(const Matrix& weight) {
  require_square_symmetric(weight);
  llt_.compute(weight);
  if (llt_.info() != Eigen::Success || (llt_.matrixL().toDenseMatrix().diagonal().array() <= 0.0).any()) {
    throw InputError("weighting matrix is not positive definite");
  }
  inverse_ = llt_.solve(Matrix::Identity(weight.rows(), weight.cols()));
  inverse_ = 0.5 * (inverse_ + inverse_.transpose());
}

Matrix weighted_pseudo_inverse(const Matrix& jacobian, const WeightFactor& weight) {
  const GramInverse g = invert_gram(jacobian, weight);
  return g.winv_jt * g.inverse;
}

Matrix weighted_pseudo_inverse(const Matrix& jacobian, const Matrix& weight) {
  return weighted_pseudo_inverse(jacobian, WeightFactor(weight));
}

Matrix pseudo_inverse_time_derivative(const Matrix& jacobian, const Matrix& jacobian_rate,
                                      const Matrix& weight, const Matrix& weight_rate) {
  const WeightFactor factor(weight);
  if (jacobian_rate.rows() != jacobian.rows() || jacobian_rate.cols() != jacobian.cols()) {
    throw InputError("jacobian rate does not match jacobian dimensions");
  }
  if (weight_rate.rows() != weight.rows() || weight_rate.cols() != weight.cols()) {
    throw InputError("weight rate does not match weight dimensions");
  }
  const GramInverse g = invert_gram(jacobian, factor);
  const Matrix& winv = factor.inverse();

  // d(W^-1) = -W^-1 dW W^-1, d(G^-1) = -G^-1 dG G^-1.
  const Matrix winv_rate = -winv * weight_rate * winv;
  const Matrix gram_rate = jacobian_rate * g.winv_jt + jacobian * winv_rate * jacobian.transpose() +
                           g.winv_jt.transpose() * jacobian_rate.transpose();
  const Matrix gram_inv_rate = -g.inverse * gram_rate * g.inverse;

  return winv_rate * jacobian.transpose() * g.inverse +
         winv * jacobian_rate.transpose() * g.inverse + g.winv_jt * gram_inv_rate;
}

Matrix nullspace_projector_velocity(const Matrix& jacobian, const Matrix& weight) {
  const Eigen::Index n = jacobian.cols();
  return Matrix::Identity(n, n) - weighted_pseudo_inverse(jacobian, weight) * jacobian;
}

Matrix nullspace_projector_torque(const Matrix& jacobian, const Matrix& weight) {
  return nullspace_projector_velocity(jacobian, weight).transpose();
}

CholeskyFactor cholesky_lower(const Matrix& spd) {
  require_square_symmetric(spd);
  Eigen::LLT<Matrix> llt(spd);
  if (llt.info() != Eigen::Success) {
    throw InputError("matrix is not positive definite");
  }
  CholeskyFactor out{llt.matrixL()};
  if ((out.lower.diagonal().array() <= 0.0).any()) {
    throw InputError("matrix is not positive definite");
  }
  return out;
}

ThinQrFactor thin_qr(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) {
    throw InputError("thin_qr needs a non-empty matrix");
  }
  require_finite(a, "thin_qr input");
  const Eigen::Index p = a.rows();
  const Eigen::Index k = std::min(a.rows(), a.cols());

  Eigen::HouseholderQR<Matrix> qr(a);
  ThinQrFactor out;
  out.q = qr.householderQ() * Matrix::Identity(p, k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < k; ++i) {
    if (out.r(i, i) < 0.0) {
      out.r.row(i) *= -1.0;
      out.q.col(i) *= -1.0;
    }
  }
  return out;
}

}  // namespace hierctl
