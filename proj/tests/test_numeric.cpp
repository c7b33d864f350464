#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <set>

#include "oracle.hpp"
#include "sixcal/error.hpp"
#include "sixcal/numeric.hpp"
#include "sixcal/synthetic.hpp"

using namespace sixcal;

namespace {

void ExpectCode(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    FAIL() << "expected " << ErrorCodeName(code);
  } catch (const SolverError& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(Rref, PermutedIdentity) {
  Eigen::MatrixXd m(2, 2);
  m << 0, 2, 1, 0;
  const RrefResult r = GaussJordanRref(m);
  EXPECT_EQ(r.rank, 2);
  EXPECT_EQ(r.pivot_cols, (std::vector<int>{0, 1}));
  EXPECT_TRUE(r.reduced.isApprox(Eigen::Matrix2d::Identity()));
}

TEST(Rref, DependentRows) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 2, 4;
  const RrefResult r = GaussJordanRref(m, 1e-12);
  EXPECT_EQ(r.rank, 1);
  EXPECT_EQ(r.pivot_cols, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(r.reduced(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(r.reduced(0, 1), 2.0);
  EXPECT_EQ(r.reduced.row(1).norm(), 0.0);
}

TEST(Rref, ZeroMatrix) {
  const RrefResult r = GaussJordanRref(Eigen::MatrixXd::Zero(3, 4));
  EXPECT_EQ(r.rank, 0);
  EXPECT_TRUE(r.pivot_cols.empty());
}

TEST(Rref, PivotsOnlyInsideLimit) {
  Eigen::MatrixXd m(2, 3);
  m << 1, 0, 5, 0, 0, 7;
  const RrefResult r = GaussJordanRref(m, kDefaultTol, 2);
  EXPECT_EQ(r.rank, 1);
  EXPECT_EQ(r.pivot_cols, std::vector<int>{0});
}

TEST(RrefProperty, IdempotentAndRowSpacePreserving) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 2 + trial % 7;
    const int cols = 2 + (trial * 5) % 9;
    Eigen::MatrixXd m = oracle::RandomMatrix(rng, rows, cols);
    if (trial % 3 == 0 && rows > 2) m.row(rows - 1) = 2.0 * m.row(0) - m.row(1);
    const RrefResult r = GaussJordanRref(m);

    // pivot structure
    for (std::size_t k = 0; k < r.pivot_cols.size(); ++k) {
      if (k > 0) EXPECT_GT(r.pivot_cols[k], r.pivot_cols[k - 1]);
      for (int i = 0; i < rows; ++i) {
        EXPECT_NEAR(r.reduced(i, r.pivot_cols[k]), i == static_cast<int>(k) ? 1.0 : 0.0, 1e-12);
      }
    }
    const RrefResult again = GaussJordanRref(r.reduced);
    EXPECT_EQ(again.pivot_cols, r.pivot_cols);
    EXPECT_LE((again.reduced - r.reduced).norm(), 1e-12);

    // row spaces agree: projecting either onto the other loses nothing
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const Eigen::MatrixXd basis = svd.matrixV().leftCols(r.rank);
    for (int i = 0; i < r.rank; ++i) {
      const Eigen::VectorXd row = r.reduced.row(i).transpose();
      EXPECT_LE((row - basis * (basis.transpose() * row)).norm(), 1e-10 * row.norm());
    }
    EXPECT_EQ(r.rank, static_cast<int>((svd.singularValues().array() > 1e-9).count()));
  }
}

TEST(MinSingularVector, ExactNullspaces) {
  Eigen::MatrixXd a(1, 2);
  a << 1, 0;
  EXPECT_TRUE(MinSingularVector(a).isApprox(Eigen::Vector2d(0, 1)));
  Eigen::MatrixXd b(2, 3);
  b << 1, 0, 0, 0, 1, 0;
  EXPECT_TRUE(MinSingularVector(b).isApprox(Eigen::Vector3d(0, 0, 1)));
}

TEST(MinSingularVector, SignAndNorm) {
  Eigen::MatrixXd a(1, 2);
  a << 0, 1;  // nullspace +-(1, 0)
  const Eigen::VectorXd v = MinSingularVector(a);
  EXPECT_DOUBLE_EQ(v(0), 1.0);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd w = MinSingularVector(oracle::RandomMatrix(rng, 6, 4));
    EXPECT_NEAR(w.norm(), 1.0, 1e-14);
    Eigen::Index i;
    w.cwiseAbs().maxCoeff(&i);
    EXPECT_GT(w(i), 0.0);
  }
}

TEST(Cholesky, KnownFactor) {
  Eigen::Matrix3d s;
  s << 14, 5, 3, 5, 5, 1, 3, 1, 1;
  Eigen::Matrix3d k;
  k << 2, 1, 3, 0, 2, 1, 0, 0, 1;
  EXPECT_LE((CholeskyUpperRight(s) - k).norm(), 1e-12);
  EXPECT_TRUE(CholeskyUpperRight(Eigen::Matrix3d::Identity()).isApprox(Eigen::Matrix3d::Identity()));
}

TEST(Cholesky, RejectsIndefinite) {
  ExpectCode(ErrorCode::kNotPositiveDefinite,
             [] { CholeskyUpperRight(Eigen::Vector3d(1, -1, 1).asDiagonal()); });
  ExpectCode(ErrorCode::kNotPositiveDefinite,
             [] { CholeskyUpperRight(Eigen::Vector3d(1, 1, -2).asDiagonal()); });
}

TEST(CholeskyProperty, RoundTripOnRandomSpd) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 500; ++k) {
    const Eigen::Matrix3d a = oracle::RandomMatrix(rng, 3, 3);
    const Eigen::Matrix3d s = a * a.transpose() + 0.1 * Eigen::Matrix3d::Identity();
    const Eigen::Matrix3d kk = CholeskyUpperRight(s);
    EXPECT_DOUBLE_EQ(kk(2, 2), 1.0);
    EXPECT_EQ(kk(1, 0), 0.0);
    EXPECT_EQ(kk(2, 0), 0.0);
    EXPECT_EQ(kk(2, 1), 0.0);
    EXPECT_GT(kk(0, 0), 0.0);
    EXPECT_GT(kk(1, 1), 0.0);
    const Eigen::Matrix3d sn = s / s(2, 2);
    EXPECT_LE((kk * kk.transpose() - sn).norm(), 1e-10 * sn.norm());
  }
}

TEST(NearestRotation, FixedPointAndScale) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    const Eigen::Matrix3d r = oracle::RandomRotation(rng);
    EXPECT_LE((NearestRotation(r) - r).norm(), 1e-12);
    EXPECT_LE((NearestRotation(1.3 * r) - r).norm(), 1e-12);
  }
}

TEST(NearestRotation, Degenerate) {
  ExpectCode(ErrorCode::kDegenerateMatrix,
             [] { NearestRotation(Eigen::Vector3d(1, 1, 0).asDiagonal()); });
  ExpectCode(ErrorCode::kDegenerateMatrix, [] { NearestRotation(Eigen::Matrix3d::Zero()); });
}

TEST(NearestRotation, ReflectionFixedToProperRotation) {
  const Eigen::Matrix3d m = Eigen::Vector3d(1.0, 2.0, -0.5).asDiagonal();
  const Eigen::Matrix3d r = NearestRotation(m);
  EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
  // the weakest direction absorbs the sign
  EXPECT_TRUE(r.isApprox(Eigen::Vector3d(1, 1, 1).asDiagonal().toDenseMatrix()));
}

TEST(NearestRotationProperty, BeatsSampledRotations) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const Eigen::Matrix3d r = oracle::RandomRotation(rng);
    Eigen::Matrix3d m = r;
    for (int i = 0; i < 9; ++i) m.data()[i] += 0.01 * n(rng);
    const Eigen::Matrix3d best = NearestRotation(m);
    EXPECT_LE((best.transpose() * best - Eigen::Matrix3d::Identity()).norm(), 1e-12);
    EXPECT_NEAR(best.determinant(), 1.0, 1e-12);
    EXPECT_LT(RotationAngleDeg(best * r.transpose()), 2.0);
    const double d = (best - m).norm();
    for (int s = 0; s < 200; ++s) {
      const Eigen::Matrix3d cand =
          oracle::Rot(Eigen::Vector3d(n(rng), n(rng), n(rng)), 3.0 * n(rng)) * best;
      EXPECT_GE((cand - m).norm(), d - 1e-12);
    }
  }
}

TEST(Cubic, Examples) {
  const auto a = CubicRealRoots(1, -6, 11, -6);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_NEAR(a[0], 1.0, 1e-12);
  EXPECT_NEAR(a[1], 2.0, 1e-12);
  EXPECT_NEAR(a[2], 3.0, 1e-12);
  const auto b = CubicRealRoots(1, 0, 0, -1);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_NEAR(b[0], 1.0, 1e-12);
  const auto c = CubicRealRoots(0, 1, -3, 2);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_NEAR(c[0], 1.0, 1e-12);
  EXPECT_NEAR(c[1], 2.0, 1e-12);
  const auto d = CubicRealRoots(0, 0, 2, -1);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NEAR(d[0], 0.5, 1e-15);
  EXPECT_TRUE(CubicRealRoots(0, 1, 0, 1).empty());
}

TEST(Cubic, ZeroPolynomial) {
  ExpectCode(ErrorCode::kZeroPolynomial, [] { CubicRealRoots(0, 0, 0, 0); });
}

TEST(CubicProperty, RootsSatisfyPolynomial) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 2000; ++k) {
    const double c3 = u(rng), c2 = u(rng), c1 = u(rng), c0 = u(rng);
    const auto roots = CubicRealRoots(c3, c2, c1, c0);
    const double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
    EXPECT_TRUE(roots.size() == 1 || roots.size() == 3) << roots.size();
    for (std::size_t i = 0; i < roots.size(); ++i) {
      const double r = roots[i];
      if (i > 0) EXPECT_LE(roots[i - 1], r);
      const double p = ((c3 * r + c2) * r + c1) * r + c0;
      EXPECT_LE(std::abs(p), 1e-9 * scale * std::pow(std::max(1.0, std::abs(r)), 3));
    }
  }
}

TEST(CubicProperty, DiscriminantSignMatchesCount) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 2000; ++k) {
    const double r1 = u(rng), r2 = u(rng), r3 = u(rng);
    // (x - r1)(x - r2)(x - r3)
    const double c2 = -(r1 + r2 + r3), c1 = r1 * r2 + r1 * r3 + r2 * r3, c0 = -r1 * r2 * r3;
    const double disc = NormalizedCubicDiscriminant(1, c2, c1, c0);
    if (std::abs(disc) > kDiscriminantBand) {
      EXPECT_EQ(CubicRealRoots(1, c2, c1, c0).size(), 3u);
    }
    // x^3 + p x + q with one real root: shift a complex pair off the axis
    const double d2 = NormalizedCubicDiscriminant(1, -r1, 1.0 + r1 * r1, 0.0);
    if (d2 < -kDiscriminantBand) EXPECT_EQ(CubicRealRoots(1, -r1, 1.0 + r1 * r1, 0.0).size(), 1u);
  }
}

TEST(ErrorCodes, NamesAreDistinct) {
  std::set<std::string_view> names;
  for (int c = 0; c <= static_cast<int>(ErrorCode::kNoHypothesis); ++c) {
    names.insert(ErrorCodeName(static_cast<ErrorCode>(c)));
  }
  EXPECT_EQ(names.size(), static_cast<std::size_t>(ErrorCode::kNoHypothesis) + 1);
}
