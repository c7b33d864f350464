#include "sixcal/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "sixcal/error.hpp"

namespace sixcal {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroPolynomial: return "ZeroPolynomial";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kDegenerateMatrix: return "DegenerateMatrix";
    case ErrorCode::kPointAtCameraCenter: return "PointAtCameraCenter";
    case ErrorCode::kDegenerateQuad: return "DegenerateQuad";
    case ErrorCode::kSingularFirstCamera: return "SingularFirstCamera";
    case ErrorCode::kProjectionAtInfinity: return "ProjectionAtInfinity";
    case ErrorCode::kDegenerateView: return "DegenerateView";
    case ErrorCode::kRankDefect: return "RankDefect";
    case ErrorCode::kNoRealCandidate: return "NoRealCandidate";
    case ErrorCode::kBasisPointCoincidence: return "BasisPointCoincidence";
    case ErrorCode::kEmptySolutionSet: return "EmptySolutionSet";
    case ErrorCode::kStructuralViolation: return "StructuralViolation";
    case ErrorCode::kBasisOverflow: return "BasisOverflow";
    case ErrorCode::kPivotPatternBroken: return "PivotPatternBroken";
    case ErrorCode::kRankUnexpected: return "RankUnexpected";
    case ErrorCode::kNormalizationFailure: return "NormalizationFailure";
    case ErrorCode::kImproperRotation: return "ImproperRotation";
    case ErrorCode::kResampleExhausted: return "ResampleExhausted";
    case ErrorCode::kDltRankDefect: return "DltRankDefect";
    case ErrorCode::kZeroTranslation: return "ZeroTranslation";
    case ErrorCode::kCoincidentCenters: return "CoincidentCenters";
    case ErrorCode::kNoHypothesis: return "NoHypothesis";
  }
  return "Unknown";
}

RrefResult GaussJordanRref(const Eigen::MatrixXd& m, double tol, int pivot_col_limit) {
  RrefResult out;
  out.reduced = m;
  Eigen::MatrixXd& a = out.reduced;
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  const Eigen::Index limit =
      pivot_col_limit < 0 ? cols : std::min<Eigen::Index>(pivot_col_limit, cols);

  const double scale = a.size() > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
  const double threshold = tol * (scale > 0.0 ? scale : 1.0);

  Eigen::Index row = 0;
  for (Eigen::Index col = 0; col < limit && row < rows; ++col) {
    Eigen::Index best = row;
    double best_abs = std::abs(a(row, col));
    for (Eigen::Index r = row + 1; r < rows; ++r) {
      const double v = std::abs(a(r, col));
      if (v > best_abs) {
        best_abs = v;
        best = r;
      }
    }
    if (best_abs <= threshold) {
      // Below threshold the column is treated as already eliminated.
      a.col(col).tail(rows - row).setZero();
      continue;
    }
    if (best != row) a.row(best).swap(a.row(row));

    a.row(row) /= a(row, col);
    a(row, col) = 1.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (r == row) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      a.row(r) -= f * a.row(row);
      a(r, col) = 0.0;
    }
    out.pivot_cols.push_back(static_cast<int>(col));
    ++row;
  }
  out.rank = static_cast<int>(out.pivot_cols.size());
  return out;
}

Eigen::VectorXd MinSingularVector(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  Eigen::VectorXd v = svd.matrixV().col(m.cols() - 1);
  v.normalize();
  FixSign(v);
  return v;
}

Eigen::Matrix3d CholeskyUpperRight(const Eigen::Matrix3d& s, double tol) {
  // Cholesky of the anti-diagonally flipped matrix, flipped back:
  // J s J = L L^T  =>  s = (J L J)(J L J)^T with J L J upper triangular.
  const Eigen::Matrix3d sym = 0.5 * (s + s.transpose());
  Eigen::Matrix3d flip = Eigen::Matrix3d::Zero();
  flip(0, 2) = flip(1, 1) = flip(2, 0) = 1.0;
  const Eigen::Matrix3d f = flip * sym * flip;

  const double scale = sym.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw SolverError(ErrorCode::kNotPositiveDefinite, "zero or non-finite matrix");
  }
  const double guard = tol * scale;

  Eigen::Matrix3d l = Eigen::Matrix3d::Zero();
  for (int j = 0; j < 3; ++j) {
    double d = f(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > guard)) {
      throw SolverError(ErrorCode::kNotPositiveDefinite, "non-positive pivot in Cholesky");
    }
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < 3; ++i) {
      double v = f(i, j);
      for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  Eigen::Matrix3d k = flip * l * flip;
  k /= k(2, 2);
  k(1, 0) = k(2, 0) = k(2, 1) = 0.0;
  return k;
}

Eigen::Matrix3d NearestRotation(const Eigen::Matrix3d& m, double tol) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(2) <= tol * sv(0)) {
    throw SolverError(ErrorCode::kDegenerateMatrix, "matrix too close to rank deficient");
  }
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) = -u.col(2);
  return u * v.transpose();
}

namespace {

double EvalCubic(double c3, double c2, double c1, double c0, double x) {
  return ((c3 * x + c2) * x + c1) * x + c0;
}

double Polish(double c3, double c2, double c1, double c0, double x) {
  const double f = EvalCubic(c3, c2, c1, c0, x);
  const double df = (3.0 * c3 * x + 2.0 * c2) * x + c1;
  if (df == 0.0) return x;
  const double y = x - f / df;
  if (std::isfinite(y) && std::abs(EvalCubic(c3, c2, c1, c0, y)) <= std::abs(f)) return y;
  return x;
}

}  // namespace

double NormalizedCubicDiscriminant(double c3, double c2, double c1, double c0) {
  const double s = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (s == 0.0) return 0.0;
  const double a = c3 / s, b = c2 / s, c = c1 / s, d = c0 / s;
  return 18.0 * a * b * c * d - 4.0 * b * b * b * d + b * b * c * c - 4.0 * a * c * c * c -
         27.0 * a * a * d * d;
}

std::vector<double> CubicRealRoots(double c3, double c2, double c1, double c0, double tol) {
  const double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw SolverError(ErrorCode::kZeroPolynomial, "all cubic coefficients vanish");
  }
  const double a3 = c3 / scale, a2 = c2 / scale, a1 = c1 / scale, a0 = c0 / scale;
  std::vector<double> roots;

  if (std::abs(a3) <= tol) {
    if (std::abs(a2) <= tol) {
      if (std::abs(a1) <= tol) return roots;  // nonzero constant
      roots.push_back(-a0 / a1);
      return roots;
    }
    const double disc = a1 * a1 - 4.0 * a2 * a0;
    if (disc < 0.0) return roots;
    // Cancellation-free quadratic formula.
    const double qq = -0.5 * (a1 + std::copysign(std::sqrt(disc), a1));
    if (qq == 0.0) {
      roots.assign(2, 0.0);
    } else {
      roots.push_back(qq / a2);
      roots.push_back(a0 / qq);
    }
    for (double& r : roots) r = Polish(0.0, a2, a1, a0, r);
    std::sort(roots.begin(), roots.end());
    return roots;
  }

  // Depressed form y^3 + p y + q with x = y - b/3.
  const double b = a2 / a3, c = a1 / a3, d = a0 / a3;
  const double shift = b / 3.0;
  const double p = c - b * b / 3.0;
  const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const double disc = NormalizedCubicDiscriminant(a3, a2, a1, a0);

  if (disc >= -kDiscriminantBand && p < 0.0) {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) - shift);
    }
  } else {
    const double dd = q * q / 4.0 + p * p * p / 27.0;
    double y = 0.0;
    if (dd > 0.0) {
      const double u = std::cbrt(-0.5 * q - std::copysign(std::sqrt(dd), q));
      y = u == 0.0 ? 0.0 : u - p / (3.0 * u);
    } else {
      y = std::cbrt(-q);  // p ~ 0: near-triple root
    }
    roots.push_back(y - shift);
    if (disc >= -kDiscriminantBand) {
      roots.push_back(y - shift);
      roots.push_back(y - shift);
    }
  }
  for (double& r : roots) r = Polish(a3, a2, a1, a0, r);
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace sixcal
