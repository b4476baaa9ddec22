#include <gtest/gtest.h>

#include "hierctl/errors.hpp"
#include "hierctl/linalg.hpp"
#include "support/oracles.hpp"

using namespace hierctl;
using oracle::max_abs;

namespace {

Matrix m(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) out(i, j++) = v;
    ++i;
  }
  return out;
}

}  // namespace

TEST(PseudoInverse, UnitRow) {
  EXPECT_LT(max_abs(weighted_pseudo_inverse(m({{1, 0}}), Matrix::Identity(2, 2)) - m({{1}, {0}})), 1e-15);
}

TEST(PseudoInverse, SymmetricRow) {
  EXPECT_LT(max_abs(weighted_pseudo_inverse(m({{1, 1}}), Matrix::Identity(2, 2)) - m({{0.5}, {0.5}})), 1e-15);
}

TEST(PseudoInverse, WeightedRowMatchesKkt) {
  const Matrix j = m({{1, 1}});
  const Matrix w = m({{1, 0}, {0, 4}});
  const Matrix expected = oracle::kkt_pseudo_inverse(j, w);
  EXPECT_LT(max_abs(expected - m({{0.8}, {0.2}})), 1e-12);
  EXPECT_LT(max_abs(weighted_pseudo_inverse(j, w) - expected), 1e-12);
}

TEST(PseudoInverse, RandomInstancesAgreeWithKkt) {
  oracle::Rng rng(11);
  for (auto [rows, cols] : {std::pair{1, 2}, {2, 4}, {3, 7}}) {
    for (int k = 0; k < 50; ++k) {
      const Matrix j = rng.full_rank(rows, cols);
      const Matrix w = rng.spd(cols);
      EXPECT_LT(max_abs(weighted_pseudo_inverse(j, w) - oracle::kkt_pseudo_inverse(j, w)), 1e-9);
    }
  }
}

TEST(PseudoInverse, SingularJacobianThrowsWithSingularValue) {
  const Matrix j = m({{1, 2}, {2, 4}});
  try {
    weighted_pseudo_inverse(j, Matrix::Identity(2, 2));
    FAIL() << "expected SingularityError";
  } catch (const SingularityError& e) {
    EXPECT_LT(e.smallest_singular_value(), 1e-6);
  }
}

TEST(PseudoInverse, NonSpdWeightIsInputError) {
  EXPECT_THROW(weighted_pseudo_inverse(m({{1, 0}}), m({{1, 0}, {0, -1}})), InputError);
  EXPECT_THROW(weighted_pseudo_inverse(m({{1, 0}}), m({{1, 0.5}, {0, 1}})), InputError);
}

TEST(PseudoInverse, MoreRowsThanColumnsIsInputError) {
  EXPECT_THROW(weighted_pseudo_inverse(Matrix::Ones(3, 2), Matrix::Identity(2, 2)), InputError);
}

TEST(PseudoInverse, NonFiniteIsInputError) {
  Matrix j = m({{1, 0}});
  j(0, 1) = std::nan("");
  EXPECT_THROW(weighted_pseudo_inverse(j, Matrix::Identity(2, 2)), InputError);
}

TEST(PseudoInverse, ScaleInvariance) {
  oracle::Rng rng(12);
  for (int k = 0; k < 100; ++k) {
    const Matrix j = rng.full_rank(2, 4);
    const Matrix w = rng.spd(4);
    const double c = rng.uniform(0.01, 100.0);
    EXPECT_LT(max_abs(weighted_pseudo_inverse(j, c * w) - weighted_pseudo_inverse(j, w)), 1e-10);
  }
}

TEST(PseudoInverseRate, ConstantInputsGiveZero) {
  const Matrix j = m({{1, 2, 3}, {0, 1, -1}});
  const Matrix z = pseudo_inverse_time_derivative(j, Matrix::Zero(2, 3), Matrix::Identity(3, 3),
                                                  Matrix::Zero(3, 3));
  EXPECT_LT(max_abs(z), 1e-15);
}

TEST(PseudoInverseRate, RotatingRow) {
  auto pinv_at = [](double t) {
    return weighted_pseudo_inverse(m({{std::cos(t), std::sin(t)}}), Matrix::Identity(2, 2));
  };
  const Matrix fd = oracle::central_difference(pinv_at);
  const Matrix d = pseudo_inverse_time_derivative(m({{1, 0}}), m({{0, 1}}), Matrix::Identity(2, 2),
                                                  Matrix::Zero(2, 2));
  EXPECT_LT(max_abs(d - fd), 1e-5);
}

TEST(PseudoInverseRate, GrowingWeight) {
  auto pinv_at = [](double t) { return weighted_pseudo_inverse(m({{1, 0}}), m({{1 + t, 0}, {0, 1}})); };
  const Matrix d = pseudo_inverse_time_derivative(m({{1, 0}}), Matrix::Zero(1, 2), Matrix::Identity(2, 2),
                                                  m({{1, 0}, {0, 0}}));
  EXPECT_LT(max_abs(d - oracle::central_difference(pinv_at)), 1e-5);
}

TEST(PseudoInverseRate, RandomSmoothPaths) {
  oracle::Rng rng(13);
  for (int k = 0; k < 100; ++k) {
    const Matrix j0 = rng.full_rank(2, 4), j1 = rng.matrix(2, 4);
    const Matrix w0 = rng.spd(4);
    const Matrix r = rng.matrix(4, 4);
    const Matrix w1 = 0.5 * (r + r.transpose());
    auto j_at = [&](double t) { return Matrix(j0 + t * j1); };
    auto w_at = [&](double t) { return Matrix(w0 + t * w1); };
    const Matrix fd = oracle::central_difference([&](double t) { return weighted_pseudo_inverse(j_at(t), w_at(t)); });
    EXPECT_LT(max_abs(pseudo_inverse_time_derivative(j0, j1, w0, w1) - fd), 1e-5);
  }
}

TEST(Projector, Examples) {
  EXPECT_LT(max_abs(nullspace_projector_velocity(m({{1, 0}}), Matrix::Identity(2, 2)) - m({{0, 0}, {0, 1}})),
            1e-15);
  const Matrix n = nullspace_projector_velocity(m({{1, 1}}), Matrix::Identity(2, 2));
  EXPECT_LT(max_abs(n - m({{0.5, -0.5}, {-0.5, 0.5}})), 1e-15);
  EXPECT_LT(max_abs(m({{1, 1}}) * n), 1e-15);
  EXPECT_LT(max_abs(nullspace_projector_velocity(m({{1, 2}, {3, 4}}), Matrix::Identity(2, 2))), 1e-12);
}

TEST(Projector, TorqueIsTranspose) {
  EXPECT_LT(max_abs(nullspace_projector_torque(m({{1, 0}}), Matrix::Identity(2, 2)) - m({{0, 0}, {0, 1}})),
            1e-15);
  const Matrix j = m({{1, 1}});
  const Matrix w = m({{1, 0}, {0, 4}});
  EXPECT_LT(max_abs(nullspace_projector_torque(j, w) - nullspace_projector_velocity(j, w).transpose()), 1e-12);
  oracle::Rng rng(14);
  const Matrix jr = rng.full_rank(2, 4);
  const Matrix wr = rng.spd(4);
  EXPECT_LT(max_abs(nullspace_projector_torque(jr, wr) -
                    (Matrix::Identity(4, 4) - weighted_pseudo_inverse(jr, wr) * jr).transpose()),
            1e-12);
}

TEST(Projector, IdentityWeightMatchesSvdProjector) {
  oracle::Rng rng(15);
  for (int k = 0; k < 50; ++k) {
    const Matrix j = rng.full_rank(3, 7);
    EXPECT_LT(max_abs(nullspace_projector_velocity(j, Matrix::Identity(7, 7)) - oracle::svd_nullspace_projector(j)),
              1e-10);
  }
}

TEST(Projector, AlgebraOnRandomInstances) {
  oracle::Rng rng(16);
  for (int k = 0; k < 100; ++k) {
    const Matrix j = rng.full_rank(2, 5);
    const Matrix w = rng.spd(5);
    const Matrix n = nullspace_projector_velocity(j, w);
    EXPECT_LT(max_abs(n * n - n), 1e-9);
    EXPECT_LT(max_abs(j * n), 1e-9);
  }
}

TEST(Cholesky, Examples) {
  EXPECT_LT(max_abs(cholesky_lower(Matrix::Identity(2, 2)).lower - Matrix::Identity(2, 2)), 1e-15);
  EXPECT_LT(max_abs(cholesky_lower(m({{4, 0}, {0, 9}})).lower - m({{2, 0}, {0, 3}})), 1e-15);
  const Matrix w = m({{4, 2}, {2, 5}});
  const Matrix l = cholesky_lower(w).lower;
  EXPECT_LT(max_abs(l - m({{2, 0}, {1, 2}})), 1e-14);
  EXPECT_LT(max_abs(l * l.transpose() - w), 1e-14);
  EXPECT_THROW(cholesky_lower(m({{1, 2}, {2, 1}})), InputError);
}

TEST(Cholesky, RandomReconstruction) {
  oracle::Rng rng(17);
  for (int k = 0; k < 50; ++k) {
    const Matrix w = rng.spd(6);
    const Matrix l = cholesky_lower(w).lower;
    EXPECT_LT(max_abs(l * l.transpose() - w) / max_abs(w), 1e-10);
    EXPECT_GT(l.diagonal().minCoeff(), 0.0);
    EXPECT_LT(max_abs(Matrix(l.triangularView<Eigen::StrictlyUpper>())), 1e-300);
  }
}

TEST(ThinQr, Examples) {
  const ThinQrFactor id = thin_qr(Matrix::Identity(2, 2));
  EXPECT_LT(max_abs(id.q - Matrix::Identity(2, 2)), 1e-15);
  EXPECT_LT(max_abs(id.r - Matrix::Identity(2, 2)), 1e-15);
  const ThinQrFactor d = thin_qr(m({{2, 0}, {0, 3}}));
  EXPECT_LT(max_abs(d.q - Matrix::Identity(2, 2)), 1e-15);
  EXPECT_LT(max_abs(d.r - m({{2, 0}, {0, 3}})), 1e-15);
  const Matrix a = m({{1, 1}, {0, 1}});
  const ThinQrFactor f = thin_qr(a);
  EXPECT_LT(max_abs(f.q * f.r - a), 1e-12);
  EXPECT_LT(max_abs(f.q.transpose() * f.q - Matrix::Identity(2, 2)), 1e-12);
}

TEST(ThinQr, TallAndWideShapes) {
  oracle::Rng rng(18);
  for (auto [p, n] : {std::pair{7, 3}, {3, 7}, {5, 5}}) {
    const Matrix a = rng.matrix(p, n);
    const ThinQrFactor f = thin_qr(a);
    const Eigen::Index k = std::min(p, n);
    EXPECT_EQ(f.q.cols(), k);
    EXPECT_LT(max_abs(f.q.transpose() * f.q - Matrix::Identity(k, k)), 1e-10);
    EXPECT_LT(max_abs(f.q * f.r - a), 1e-10);
    EXPECT_GE(f.r.diagonal().minCoeff(), 0.0);
  }
}
