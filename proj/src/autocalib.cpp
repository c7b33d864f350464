#include "sixcal/autocalib.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace sixcal {

namespace {

// Structural zeros of each subdeterminant, relative to the largest
// coefficient at balanced variable scale.
constexpr double kStructuralTol = 1e-8;
constexpr int kBalancePasses = 4;

// Rows of the F matrices that feed the next stage, in the order appended.
struct Shift {
  int row;
  ScaleVar var;
};

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Appends shifted copies of rows of `reduced` below it.
MatrixXld Extend(const MatrixXld& reduced, std::initializer_list<Shift> shifts) {
  MatrixXld out(reduced.rows() + static_cast<Eigen::Index>(shifts.size()), kNumMonomials);
  out.topRows(reduced.rows()) = reduced;
  Eigen::Index r = reduced.rows();
  for (const Shift& s : shifts) {
    out.row(r).setZero();
    const long double scale = reduced.row(s.row).cwiseAbs().maxCoeff();
    for (int k = 0; k < kNumMonomials; ++k) {
      const int t = MonomialIndex(kMonomialExponents[k][0] + (s.var == ScaleVar::kLambda ? 1 : 0),
                                  kMonomialExponents[k][1] + (s.var == ScaleVar::kMu ? 1 : 0));
      if (t >= 0) {
        out(r, t) = reduced(s.row, k);
      } else if (std::abs(reduced(s.row, k)) > 1e-11L * scale) {
        throw SolverError(ErrorCode::kBasisOverflow, "shifted monomial leaves the basis");
      }
    }
    ++r;
  }
  return out;
}

// Same pivoting rule as GaussJordanRref, in extended precision. The stages
// chain four reductions and roughly a third of the noiseless instances lost
// more than eight digits in double.
void ReduceExpectingLeadingPivots(MatrixXld& a, const char* stage) {
  const long double threshold = kDefaultTol * std::max(a.cwiseAbs().maxCoeff(), 1e-300L);
  for (Eigen::Index row = 0; row < a.rows(); ++row) {
    const Eigen::Index col = row;
    Eigen::Index best = row;
    for (Eigen::Index r = row + 1; r < a.rows(); ++r) {
      if (std::abs(a(r, col)) > std::abs(a(best, col))) best = r;
    }
    if (!(std::abs(a(best, col)) > threshold)) {
      throw SolverError(ErrorCode::kPivotPatternBroken,
                        std::string("unexpected pivot columns after ") + stage);
    }
    if (best != row) a.row(best).swap(a.row(row));
    a.row(row) /= a(row, col);
    a(row, col) = 1.0L;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      if (r == row) continue;
      const long double f = a(r, col);
      if (f == 0.0L) continue;
      a.row(r) -= f * a.row(row);
      a(r, col) = 0.0L;
    }
  }
}

int PermutationSign(const std::vector<int>& perm) {
  int sign = 1;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    for (std::size_t j = i + 1; j < perm.size(); ++j) {
      if (perm[i] > perm[j]) sign = -sign;
    }
  }
  return sign;
}

}  // namespace

int MonomialIndex(int lambda_exp, int mu_exp) {
  for (int k = 0; k < kNumMonomials; ++k) {
    if (kMonomialExponents[k][0] == lambda_exp && kMonomialExponents[k][1] == mu_exp) return k;
  }
  return -1;
}

Eigen::Matrix<double, kNumMonomials, 1> MonomialVector(double lambda, double mu) {
  Eigen::Matrix<double, kNumMonomials, 1> y;
  for (int k = 0; k < kNumMonomials; ++k) {
    y(k) = std::pow(lambda, kMonomialExponents[k][0]) * std::pow(mu, kMonomialExponents[k][1]);
  }
  return y;
}

double EvaluatePoly(const PolyRow18& row, double lambda, double mu) {
  return row.dot(MonomialVector(lambda, mu).transpose());
}

Vector10d QuadricToVector(const Eigen::Matrix4d& q) {
  Vector10d x;
  x << q(3, 3), q(0, 3), q(1, 3), q(2, 3), q(0, 0), q(0, 1), q(0, 2), q(1, 1), q(1, 2), q(2, 2);
  return x;
}

Eigen::Matrix4d VectorToQuadric(const Vector10d& x) {
  Eigen::Matrix4d q;
  q << x(4), x(5), x(6), x(1),  //
      x(5), x(7), x(8), x(2),   //
      x(6), x(8), x(9), x(3),   //
      x(1), x(2), x(3), x(0);
  return q;
}

Vector6d SymmetricEntries(const Eigen::Matrix3d& s) {
  Vector6d v;
  v << s(0, 0), s(0, 1), s(0, 2), s(1, 1), s(1, 2), s(2, 2);
  return v;
}

Matrix12x10 ConstraintMatrix::At(double lambda, double mu) const {
  Matrix12x10 c = -D;
  for (int k = 0; k < 6; ++k) {
    c(k, 4 + k) += lambda;
    c(6 + k, 4 + k) += mu;
  }
  return c;
}

ConstraintMatrix BuildConstraints(const ProjectiveTriplet& triplet) {
  ConstraintMatrix c;
  for (int k = 0; k < 10; ++k) {
    const Eigen::Matrix4d q = VectorToQuadric(Vector10d::Unit(k));
    for (int v = 0; v < 2; ++v) {
      const Matrix34d& p = triplet.cameras[v + 1].P;
      c.D.col(k).segment<6>(6 * v) = SymmetricEntries(p * q * p.transpose());
    }
  }
  return c;
}

ProjectiveTriplet BalanceTripletScale(const ProjectiveTriplet& triplet) {
  ProjectiveTriplet out = triplet;
  std::pair<double, double> radii = {1.0, 1.0};
  for (int pass = 0; pass < kBalancePasses; ++pass) {
    const ConstraintMatrix c = BuildConstraints(out);
    std::array<PolyRow18, 6> polys;
    try {
      for (int i = 0; i < 6; ++i) polys[i] = SubdeterminantPoly(c, i, false, radii);
    } catch (const SolverError&) {
      return out;
    }
    const auto [rho_l, rho_m] = EstimateVariableScales(polys);
    if (std::abs(std::log(rho_l)) < 0.05 && std::abs(std::log(rho_m)) < 0.05) break;
    // lambda and mu scale with the square of their camera.
    out.cameras[1].P /= std::sqrt(rho_l);
    out.cameras[2].P /= std::sqrt(rho_m);
  }
  return out;
}

std::pair<double, double> EstimateVariableScales(std::span<const PolyRow18> polys) {
  // Least-squares fit log|c_jk| ~ a - j log(rho_l) - k log(rho_m) over the
  // nonzero coefficients of every row, each row with its own offset.
  const int n_rows = static_cast<int>(polys.size());
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (int r = 0; r < n_rows; ++r) {
    const double top = polys[r].cwiseAbs().maxCoeff();
    if (!(top > 0.0)) continue;
    for (int k = 0; k < kNumMonomials; ++k) {
      const double v = std::abs(polys[r](k));
      if (!(v > 0.0)) continue;
      Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(2 + n_rows);
      a(0) = kMonomialExponents[k][0];
      a(1) = kMonomialExponents[k][1];
      a(2 + r) = 1.0;
      rows.push_back(a);
      rhs.push_back(-std::log(v / top));
    }
  }
  if (rows.size() < static_cast<std::size_t>(2 + n_rows)) return {1.0, 1.0};
  Eigen::MatrixXd a(rows.size(), 2 + n_rows);
  Eigen::VectorXd b(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    a.row(i) = rows[i];
    b(i) = rhs[i];
  }
  const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(b);
  // -log|c| ~ j log(rho_l) + k log(rho_m) - offset
  const double rho_l = std::exp(sol(0));
  const double rho_m = std::exp(sol(1));
  if (!std::isfinite(rho_l) || !std::isfinite(rho_m)) return {1.0, 1.0};
  return {rho_l, rho_m};
}

namespace {

// Determinant by elimination with partial pivoting on |re| + |im|, which
// avoids a hypot per comparison.
std::complex<long double> ComplexDet5(Eigen::Matrix<std::complex<long double>, 5, 5>& a) {
  using cd = std::complex<long double>;
  auto mag = [](const cd& z) { return std::abs(z.real()) + std::abs(z.imag()); };
  cd det = 1.0L;
  for (int col = 0; col < 5; ++col) {
    int best = col;
    for (int r = col + 1; r < 5; ++r) {
      if (mag(a(r, col)) > mag(a(best, col))) best = r;
    }
    if (mag(a(best, col)) == 0.0L) return 0.0L;
    if (best != col) {
      a.row(best).swap(a.row(col));
      det = -det;
    }
    const cd piv = a(col, col);
    det *= piv;
    const cd inv = 1.0L / piv;
    for (int r = col + 1; r < 5; ++r) {
      const cd f = a(r, col) * inv;
      for (int c = col + 1; c < 5; ++c) a(r, c) -= f * a(col, c);
    }
  }
  return det;
}

struct Submatrix {
  Eigen::Matrix<double, 10, 10> c0, cl, cm;  // C = c0 + lambda cl + mu cm
};

Submatrix BuildSubmatrix(const ConstraintMatrix& c, int i) {
  Submatrix s;
  s.c0.setZero();
  s.cl.setZero();
  s.cm.setZero();
  int r = 0;
  for (int k = 0; k < 12; ++k) {
    if (k == i || k == i + 6) continue;
    s.c0.row(r) = -c.D.row(k);
    if (k < 6) s.cl(r, 4 + k) = 1.0;
    else s.cm(r, 4 + k - 6) = 1.0;
    ++r;
  }
  return s;
}

}  // namespace

double SubdeterminantDirect(const ConstraintMatrix& c, int i, double lambda, double mu) {
  const Submatrix s = BuildSubmatrix(c, i);
  const Eigen::Matrix<double, 10, 10> m = s.c0 + lambda * s.cl + mu * s.cm;
  return m.partialPivLu().determinant();
}

PolyRow18 SubdeterminantPoly(const ConstraintMatrix& c, int i, bool check_structure,
                             std::pair<double, double> radii) {
  if (i < 0 || i > 5) throw std::out_of_range("subdeterminant index must be in 0..5");
  if (!(radii.first > 0.0) || !(radii.second > 0.0)) {
    throw std::invalid_argument("interpolation radii must be positive");
  }
  const Submatrix s = BuildSubmatrix(c, i);

  // Columns 0..3 and 4+i carry no lambda or mu once rows i and i+6 are gone.
  std::vector<int> perm = {0, 1, 2, 3, 4 + i};
  for (int j = 0; j < 6; ++j) {
    if (j != i) perm.push_back(4 + j);
  }
  // Extended precision: the elimination schedule downstream amplifies
  // coefficient errors, so they are kept well below double rounding.
  using Mat = Eigen::Matrix<long double, 10, 10>;
  Mat a0, al, am;
  for (int k = 0; k < 10; ++k) {
    a0.col(k) = s.c0.col(perm[k]).cast<long double>();
    al.col(k) = s.cl.col(perm[k]).cast<long double>();
    am.col(k) = s.cm.col(perm[k]).cast<long double>();
  }
  long double factor = PermutationSign(perm);

  // Partial-pivoted elimination of the five scalar columns.
  for (int col = 0; col < 5; ++col) {
    Eigen::Index best = col;
    a0.col(col).tail(10 - col).cwiseAbs().maxCoeff(&best);
    best += col;
    const long double piv = a0(best, col);
    if (piv == 0.0L) {
      throw SolverError(ErrorCode::kStructuralViolation, "scalar block of the submatrix is singular");
    }
    if (best != col) {
      a0.row(best).swap(a0.row(col));
      al.row(best).swap(al.row(col));
      am.row(best).swap(am.row(col));
      factor = -factor;
    }
    factor *= piv;
    for (int r = col + 1; r < 10; ++r) {
      const long double f = a0(r, col) / piv;
      if (f == 0.0L) continue;
      a0.row(r) -= f * a0.row(col);
      al.row(r) -= f * al.row(col);
      am.row(r) -= f * am.row(col);
      a0(r, col) = 0.0L;
    }
  }
  const Eigen::Matrix<long double, 5, 5> c1 = a0.bottomRightCorner<5, 5>();
  const Eigen::Matrix<long double, 5, 5> c2 = al.bottomRightCorner<5, 5>();
  const Eigen::Matrix<long double, 5, 5> c3 = am.bottomRightCorner<5, 5>();

  // det(c1 + l c2 + m c3) has degree <= 5 in each variable, so a 6x6 grid on
  // the torus |l| = rho_l, |m| = rho_m determines it through a 2-D DFT.
  const long double rho_l = radii.first;
  const long double rho_m = radii.second;
  using cd = std::complex<long double>;
  constexpr int kGrid = 6;
  std::array<cd, kGrid> roots;
  for (int k = 0; k < kGrid; ++k) roots[k] = std::polar(1.0L, 2.0L * std::numbers::pi_v<long double> * k / kGrid);

  // Real coefficients: the value at the conjugate grid point is the
  // conjugate, so only half of the grid is evaluated.
  Eigen::Matrix<cd, kGrid, kGrid> values;
  std::array<std::array<bool, kGrid>, kGrid> done{};
  for (int a = 0; a < kGrid; ++a) {
    for (int b = 0; b < kGrid; ++b) {
      if (done[a][b]) continue;
      const cd l = rho_l * roots[a];
      const cd m = rho_m * roots[b];
      Eigen::Matrix<cd, 5, 5> z = c1.cast<cd>() + l * c2.cast<cd>() + m * c3.cast<cd>();
      values(a, b) = ComplexDet5(z);
      const int ca = (kGrid - a) % kGrid;
      const int cb = (kGrid - b) % kGrid;
      values(ca, cb) = std::conj(values(a, b));
      done[a][b] = done[ca][cb] = true;
    }
  }
  // balanced(j, k) = coeff(l^j m^k) * rho_l^j * rho_m^k
  Eigen::Matrix<double, kGrid, kGrid> balanced;
  for (int j = 0; j < kGrid; ++j) {
    for (int k = 0; k < kGrid; ++k) {
      cd acc = 0.0L;
      for (int a = 0; a < kGrid; ++a) {
        for (int b = 0; b < kGrid; ++b) {
          acc += values(a, b) * std::conj(roots[(a * j + b * k) % kGrid]);
        }
      }
      balanced(j, k) = static_cast<double>(factor * acc.real() / (kGrid * kGrid));
    }
  }

  const double top = balanced.cwiseAbs().maxCoeff();
  const double worst =
      std::max({std::abs(balanced(5, 0)), std::abs(balanced(0, 5)), std::abs(balanced(0, 0))});
  if (!(top > 0.0) || (check_structure && worst > kStructuralTol * top)) {
    throw SolverError(ErrorCode::kStructuralViolation,
                      "subdeterminant has constant or fifth-power terms");
  }

  PolyRow18 row;
  for (int k = 0; k < kNumMonomials; ++k) {
    const int ej = kMonomialExponents[k][0];
    const int ek = kMonomialExponents[k][1];
    row(k) = balanced(ej, ek) / (std::pow(rho_l, ej) * std::pow(rho_m, ek));
  }
  return row;
}

PolyRow18 ShiftRow(const PolyRow18& row, ScaleVar var, double tol) {
  const double scale = row.cwiseAbs().maxCoeff();
  PolyRow18 out = PolyRow18::Zero();
  for (int k = 0; k < kNumMonomials; ++k) {
    const int ej = kMonomialExponents[k][0] + (var == ScaleVar::kLambda ? 1 : 0);
    const int ek = kMonomialExponents[k][1] + (var == ScaleVar::kMu ? 1 : 0);
    const int target = MonomialIndex(ej, ek);
    if (target < 0) {
      if (std::abs(row(k)) > tol * scale) {
        throw SolverError(ErrorCode::kBasisOverflow, "shifted monomial leaves the basis");
      }
      continue;
    }
    out(target) = row(k);
  }
  return out;
}

Eigen::Matrix<double, 6, kNumMonomials> BuildF0(const ConstraintMatrix& c) {
  Eigen::Matrix<double, 6, kNumMonomials> f0;
  for (int i = 0; i < 6; ++i) {
    PolyRow18 row = SubdeterminantPoly(c, i);
    row /= row.cwiseAbs().maxCoeff();
    f0.row(i) = row;
  }
  return f0;
}

EliminationResult EliminationPipeline(const Eigen::Matrix<double, 6, kNumMonomials>& f0) {
  using V = ScaleVar;
  MatrixXld f = f0.cast<long double>();
  ReduceExpectingLeadingPivots(f, "F0");
  f = Extend(f, {{5, V::kLambda}, {4, V::kMu}});
  ReduceExpectingLeadingPivots(f, "F1");
  f = Extend(f, {{6, V::kLambda}, {6, V::kMu}, {7, V::kLambda}, {7, V::kMu}});
  ReduceExpectingLeadingPivots(f, "F2");
  f = Extend(f, {{10, V::kLambda}, {10, V::kMu}, {11, V::kLambda}, {11, V::kMu}, {9, V::kMu}});
  ReduceExpectingLeadingPivots(f, "F3");

  EliminationResult out;
  out.f3_reduced = f.cast<double>();
  // Row 15: mu^2 + a mu = 0.  Row 16: lambda + b mu = 0.
  out.mu = static_cast<double>(-f(15, 17));
  out.lambda = static_cast<double>(f(15, 17) * f(16, 17));
  return out;
}

Eigen::Matrix4d DualQuadricSolution::Quadric() const { return VectorToQuadric(x); }

DualQuadricSolution RecoverDualQuadric(const ConstraintMatrix& c, double lambda, double mu) {
  if (!std::isfinite(lambda) || !std::isfinite(mu)) {
    throw SolverError(ErrorCode::kRankUnexpected, "non-finite scales");
  }
  const double dscale = c.D.norm();
  if (std::abs(lambda) <= kDefaultTol * dscale && std::abs(mu) <= kDefaultTol * dscale) {
    throw SolverError(ErrorCode::kRankUnexpected, "zero scales give a degenerate quadric");
  }
  const Matrix12x10 cm = c.At(lambda, mu);
  // Column equilibration: the unknowns of x differ by many orders of
  // magnitude in pixel units, which would otherwise hide small columns
  // below the rank threshold.
  Vector10d col_scale;
  for (int k = 0; k < 10; ++k) {
    const double n = cm.col(k).norm();
    col_scale(k) = n > 0.0 ? n : 1.0;
  }
  const Matrix12x10 scaled = cm * col_scale.cwiseInverse().asDiagonal();
  const RrefResult rr = GaussJordanRref(scaled, kDefaultTol, 9);
  if (rr.rank != 9) {
    throw SolverError(ErrorCode::kRankUnexpected, "constraint matrix rank is not 9");
  }
  for (int k = 0; k < 9; ++k) {
    if (rr.pivot_cols[k] != k) {
      throw SolverError(ErrorCode::kNormalizationFailure, "pivot structure leaves x[9] basic");
    }
  }

  DualQuadricSolution sol;
  sol.lambda = lambda;
  sol.mu = mu;
  for (int k = 0; k < 9; ++k) sol.x(k) = -rr.reduced(k, 9) * col_scale(9) / col_scale(k);
  sol.x(9) = 1.0;
  if (!sol.x.allFinite()) {
    throw SolverError(ErrorCode::kNormalizationFailure, "non-finite quadric entries");
  }
  sol.r = sol.x(0);
  sol.q = sol.x.segment<3>(1);
  const Eigen::Matrix4d qm = VectorToQuadric(sol.x);
  sol.omega = qm.topLeftCorner<3, 3>();
  sol.residual = (cm * sol.x).norm() / dscale;
  return sol;
}

std::array<Camera, 3> CalibrationResult::MetricCameras() const {
  std::array<Camera, 3> cams;
  cams[0].P.setZero();
  cams[0].P.leftCols<3>() = K;
  cams[1].P << K * R2, K * t2;
  cams[2].P << K * R3, K * t3;
  return cams;
}

CalibrationResult CalibrateAndUpgrade(const ProjectiveTriplet& triplet,
                                      const DualQuadricSolution& sol) {
  CalibrationResult res;
  res.lambda = sol.lambda;
  res.mu = sol.mu;
  res.constraint_residual = sol.residual;

  res.K = CholeskyUpperRight(sol.omega);
  res.positive_definite = true;
  res.p = -sol.omega.ldlt().solve(sol.q);
  res.H.setIdentity();
  res.H.topLeftCorner<3, 3>() = res.K;
  res.H.block<1, 3>(3, 0) = -res.p.transpose() * res.K;

  const Eigen::Matrix3d k_inv = res.K.inverse();
  for (int v = 1; v <= 2; ++v) {
    Matrix34d m = k_inv * (triplet.cameras[v].P * res.H);
    double det = m.leftCols<3>().determinant();
    if (det < 0.0) {
      m = -m;
      det = -det;
    }
    if (!(det > 0.0) || !std::isfinite(det)) {
      throw SolverError(ErrorCode::kImproperRotation, "metric camera has a singular rotation block");
    }
    const double s = std::cbrt(det);
    const Eigen::Matrix3d scaled = m.leftCols<3>() / s;
    Eigen::Matrix3d rot;
    try {
      rot = NearestRotation(scaled);
    } catch (const SolverError&) {
      throw SolverError(ErrorCode::kImproperRotation, "rotation block is degenerate");
    }
    res.rotation_defect = std::max(res.rotation_defect, (rot - scaled).norm());
    const Eigen::Vector3d t = m.col(3) / s;
    if (v == 1) {
      res.R2 = rot;
      res.t2 = t;
    } else {
      res.R3 = rot;
      res.t3 = t;
    }
  }
  return res;
}

void ResolveCheiralityAndScore(CalibrationResult* result, const Observations& obs) {
  const std::size_t n = obs.empty() ? 0 : obs[0].size();
  auto triangulate = [&](const std::array<Camera, 3>& cams) {
    std::vector<WorldPoint> pts(n);
    for (std::size_t j = 0; j < n; ++j) {
      const std::array<Eigen::Vector2d, 3> o = {obs[0][j], obs[1][j], obs[2][j]};
      pts[j] = TriangulateDlt(cams, o);
    }
    return pts;
  };

  std::array<Camera, 3> cams = result->MetricCameras();
  std::vector<WorldPoint> pts = triangulate(cams);
  int in_front = 0, total = 0;
  for (const WorldPoint& x : pts) {
    for (const Camera& c : cams) {
      const double depth = (c.P * x)(2) * x(3);
      if (depth > 0.0) ++in_front;
      ++total;
    }
  }
  if (2 * in_front < total) {
    result->t2 = -result->t2;
    result->t3 = -result->t3;
    result->reflected = true;
    cams = result->MetricCameras();
    pts = triangulate(cams);
  }
  try {
    result->residual_px = ReprojectionRms(cams, pts, obs);
  } catch (const SolverError&) {
    result->residual_px = std::numeric_limits<double>::infinity();
  }
}

std::pair<double, double> RefineScales(const Eigen::Matrix<double, 6, kNumMonomials>& f0,
                                       double lambda, double mu, int max_iterations) {
  auto residual = [&](double l, double m) {
    Eigen::Matrix<double, 6, 1> r;
    for (int i = 0; i < 6; ++i) r(i) = EvaluatePoly(f0.row(i), l, m);
    return r;
  };
  Eigen::Matrix<double, 6, 1> r = residual(lambda, mu);
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::Matrix<double, 6, 2> jac = Eigen::Matrix<double, 6, 2>::Zero();
    for (int k = 0; k < kNumMonomials; ++k) {
      const int a = kMonomialExponents[k][0];
      const int b = kMonomialExponents[k][1];
      const double dl = a > 0 ? a * std::pow(lambda, a - 1) * std::pow(mu, b) : 0.0;
      const double dm = b > 0 ? b * std::pow(lambda, a) * std::pow(mu, b - 1) : 0.0;
      jac.col(0) += f0.col(k) * dl;
      jac.col(1) += f0.col(k) * dm;
    }
    const Eigen::Vector2d step = jac.colPivHouseholderQr().solve(-r);
    if (!step.allFinite()) break;
    const Eigen::Matrix<double, 6, 1> r_new = residual(lambda + step(0), mu + step(1));
    if (!(r_new.norm() < r.norm())) break;
    lambda += step(0);
    mu += step(1);
    r = r_new;
  }
  return {lambda, mu};
}

CalibrationResult CalibrateTriplet(const ProjectiveTriplet& triplet) {
  const ProjectiveTriplet balanced = BalanceTripletScale(triplet);
  const ConstraintMatrix c = BuildConstraints(balanced);
  const Eigen::Matrix<double, 6, kNumMonomials> f0 = BuildF0(c);
  const EliminationResult er = EliminationPipeline(f0);
  const auto [lambda, mu] = RefineScales(f0, er.lambda, er.mu);
  const DualQuadricSolution sol = RecoverDualQuadric(c, lambda, mu);
  return CalibrateAndUpgrade(balanced, sol);
}

AutocalibOutput Autocalibrate(const SixViewCorrespondences& corr) {
  AutocalibOutput out;
  SixPointSolutionSet proj;
  Observations obs(3, std::vector<Eigen::Vector2d>(6));
  try {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 6; ++j) obs[i][j] = Dehomogenize(corr.views[i][j]);
    }
    proj = ProjectiveReconstruction(corr);
  } catch (const SolverError& e) {
    out.projective_error = e.code();
    return out;
  }
  out.projective_roots = static_cast<int>(proj.solutions.size());

  for (int k = 0; k < out.projective_roots; ++k) {
    RootDiagnostic diag;
    diag.root_index = k;
    diag.projective_residual_px = proj.solutions[k].residual_px;
    try {
      CalibrationResult res = CalibrateTriplet(proj.solutions[k]);
      res.root_index = k;
      ResolveCheiralityAndScore(&res, obs);
      out.results.push_back(res);
    } catch (const SolverError& e) {
      diag.error = e.code();
    }
    out.diagnostics.push_back(diag);
  }
  std::stable_sort(out.results.begin(), out.results.end(),
                   [](const CalibrationResult& a, const CalibrationResult& b) {
                     return a.residual_px < b.residual_px;
                   });
  return out;
}

}  // namespace sixcal
