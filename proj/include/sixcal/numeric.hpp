#pragma once

#include <vector>

#include <Eigen/Core>

namespace sixcal {

// Relative tolerance used throughout when the caller does not supply one.
inline constexpr double kDefaultTol = 1e-12;

using Matrix34d = Eigen::Matrix<double, 3, 4>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

struct RrefResult {
  Eigen::MatrixXd reduced;
  std::vector<int> pivot_cols;  // 0-based, strictly increasing
  int rank = 0;
};

// Gauss-Jordan elimination to reduced row-echelon form with partial
// pivoting. Columns are scanned left to right; the pivot is the entry of
// largest magnitude among the rows not yet used. A column is skipped when
// that magnitude is <= tol * max|m| (or tol when m is zero). Rows are
// swapped, columns never are.
//
// If pivot_col_limit >= 0 only the first pivot_col_limit columns are
// eligible for pivots; the remaining columns are carried along as
// right-hand sides.
RrefResult GaussJordanRref(const Eigen::MatrixXd& m, double tol = kDefaultTol,
                           int pivot_col_limit = -1);

// Right singular vector for the smallest singular value. Unit norm, sign
// chosen so that the entry of largest magnitude is positive.
Eigen::VectorXd MinSingularVector(const Eigen::MatrixXd& m);

// Upper-triangular K with s = K * K^T, positive diagonal, K(2,2) == 1.
// Throws kNotPositiveDefinite.
Eigen::Matrix3d CholeskyUpperRight(const Eigen::Matrix3d& s, double tol = kDefaultTol);

// Closest rotation in Frobenius norm (U * V^T with a det fix on the weakest
// singular direction). Throws kDegenerateMatrix when m is near rank
// deficient.
Eigen::Matrix3d NearestRotation(const Eigen::Matrix3d& m, double tol = kDefaultTol);

// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 in ascending order, repeated
// according to multiplicity. A vanishing leading coefficient drops to the
// quadratic and then the linear case. Throws kZeroPolynomial.
std::vector<double> CubicRealRoots(double c3, double c2, double c1, double c0,
                                   double tol = kDefaultTol);

// Discriminant of the cubic after scaling the coefficients to unit max-abs.
double NormalizedCubicDiscriminant(double c3, double c2, double c1, double c0);

// Band inside which a negative normalized discriminant is treated as a
// double root rather than a complex pair.
inline constexpr double kDiscriminantBand = 1e-8;

// Flip v in place so that its largest-magnitude entry is positive.
template <typename Derived>
void FixSign(Eigen::MatrixBase<Derived>& v) {
  Eigen::Index r = 0, c = 0;
  v.cwiseAbs().maxCoeff(&r, &c);
  if (v(r, c) < 0) v = -v;
}

}  // namespace sixcal
