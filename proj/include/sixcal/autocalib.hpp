#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sixcal/error.hpp"
#include "sixcal/geometry.hpp"
#include "sixcal/six_point.hpp"

namespace sixcal {

// Monomial basis of the scale polynomials, indexed 0..17:
//   l^4m l^3m^2 l^2m^3 lm^4 l^4 m^4 l^3m l^2m^2 lm^3 l^3 l^2m lm^2 m^3
//   l^2 lm m^2 l m
// where l = lambda, m = mu. No constant, no l^5, no m^5.
inline constexpr int kNumMonomials = 18;
inline constexpr std::array<std::array<int, 2>, kNumMonomials> kMonomialExponents = {{
    {4, 1}, {3, 2}, {2, 3}, {1, 4}, {4, 0}, {0, 4}, {3, 1}, {2, 2}, {1, 3},
    {3, 0}, {2, 1}, {1, 2}, {0, 3}, {2, 0}, {1, 1}, {0, 2}, {1, 0}, {0, 1},
}};

using PolyRow18 = Eigen::Matrix<double, 1, kNumMonomials>;
using Matrix12x10 = Eigen::Matrix<double, 12, 10>;
using Vector10d = Eigen::Matrix<double, 10, 1>;

enum class ScaleVar { kLambda, kMu };

Eigen::Matrix<double, kNumMonomials, 1> MonomialVector(double lambda, double mu);
double EvaluatePoly(const PolyRow18& row, double lambda, double mu);

// Index of the monomial with the given exponents, or -1 outside the basis.
int MonomialIndex(int lambda_exp, int mu_exp);

// Unknown vector x = (r, q1, q2, q3, w11, w12, w13, w22, w23, w33) of the
// absolute dual quadric [[w, q], [q^T, r]].
Vector10d QuadricToVector(const Eigen::Matrix4d& q);
Eigen::Matrix4d VectorToQuadric(const Vector10d& x);

// The upper-triangle entries (11, 12, 13, 22, 23, 33) of a symmetric 3x3.
Vector6d SymmetricEntries(const Eigen::Matrix3d& s);

// C(lambda, mu) = [[0, lambda*I6], [0, mu*I6]] - D. Rows 0..5 are the
// symmetric entries of P2' Q P2'^T, rows 6..11 those of P3' Q P3'^T.
struct ConstraintMatrix {
  Matrix12x10 D = Matrix12x10::Zero();

  Matrix12x10 At(double lambda, double mu) const;
};

ConstraintMatrix BuildConstraints(const ProjectiveTriplet& triplet);

// Rescales cameras 2 and 3 so that lambda and mu are of order one, using
// EstimateVariableScales on the subdeterminant polynomials. Homogeneous
// cameras are unchanged as projective objects.
ProjectiveTriplet BalanceTripletScale(const ProjectiveTriplet& triplet);

// Typical magnitudes (rho_lambda, rho_mu) of the variables, from a
// log-linear fit of the coefficient magnitudes against the exponents.
std::pair<double, double> EstimateVariableScales(std::span<const PolyRow18> polys);

// Determinant of C with rows i and i+6 removed (i in 0..5), as a
// polynomial over the 18-monomial basis. The five columns free of lambda and
// mu are eliminated first; the remaining 5x5 pencil
// det(C1 + lambda C2 + mu C3) is interpolated from evaluations on a 6x6
// grid of complex points on the torus |lambda|, |mu| = radii. Throws
// kStructuralViolation if the l^5, m^5 or constant coefficients do not
// vanish.
PolyRow18 SubdeterminantPoly(const ConstraintMatrix& c, int i, bool check_structure = true,
                             std::pair<double, double> radii = {1.0, 1.0});

// Brute-force 10x10 determinant of the same submatrix; test oracle.
double SubdeterminantDirect(const ConstraintMatrix& c, int i, double lambda, double mu);

// Multiplies a row by lambda or mu in the monomial basis. Throws
// kBasisOverflow when the product leaves the basis.
PolyRow18 ShiftRow(const PolyRow18& row, ScaleVar var, double tol = 1e-11);

struct EliminationResult {
  double lambda = 0.0;
  double mu = 0.0;
  Eigen::MatrixXd f3_reduced;  // 17 x 18
};

// F0 -> rref -> F1 -> rref -> F2 -> rref -> F3 -> rref with the fixed
// row-shift schedule; mu and lambda are read from the last two rows of the
// final reduced matrix. Throws kPivotPatternBroken, kBasisOverflow.
EliminationResult EliminationPipeline(const Eigen::Matrix<double, 6, kNumMonomials>& f0);

// Gauss-Newton polish of (lambda, mu) on the six F0 polynomials; a step is
// kept only while it lowers the residual.
std::pair<double, double> RefineScales(const Eigen::Matrix<double, 6, kNumMonomials>& f0,
                                       double lambda, double mu, int max_iterations = 5);

// F0 from the six subdeterminant polynomials, each row scaled to unit
// max-abs.
Eigen::Matrix<double, 6, kNumMonomials> BuildF0(const ConstraintMatrix& c);

struct DualQuadricSolution {
  double lambda = 0.0;
  double mu = 0.0;
  double r = 0.0;
  Eigen::Vector3d q = Eigen::Vector3d::Zero();
  Eigen::Matrix3d omega = Eigen::Matrix3d::Identity();  // omega(2,2) == 1
  Vector10d x = Vector10d::Zero();
  double residual = 0.0;  // |C(lambda, mu) x| / |D|_F

  Eigen::Matrix4d Quadric() const;
};

// Solves C(lambda, mu) x = 0 with x[9] = 1 by Gauss-Jordan elimination over
// the first nine columns. Throws kRankUnexpected, kNormalizationFailure.
DualQuadricSolution RecoverDualQuadric(const ConstraintMatrix& c, double lambda, double mu);

struct CalibrationResult {
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d R2 = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d R3 = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t2 = Eigen::Vector3d::Zero();
  Eigen::Vector3d t3 = Eigen::Vector3d::Zero();
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Matrix4d H = Eigen::Matrix4d::Identity();

  double lambda = 0.0;
  double mu = 0.0;
  int root_index = -1;
  bool positive_definite = false;
  bool reflected = false;         // translations negated for cheirality
  double constraint_residual = 0.0;
  double rotation_defect = 0.0;   // max |R~ - R/s|_F before orthonormalization
  double residual_px = 0.0;       // metric reprojection RMS, when observed

  // K[I|0], K[R2|t2], K[R3|t3].
  std::array<Camera, 3> MetricCameras() const;
};

// K from the Cholesky factor of omega, p = -omega^-1 q, H = [[K, 0],
// [-p^T K, 1]], then rotations and translations of views 2 and 3.
// Throws kNotPositiveDefinite, kImproperRotation.
CalibrationResult CalibrateAndUpgrade(const ProjectiveTriplet& triplet,
                                      const DualQuadricSolution& sol);

// Chooses the translation sign that puts the triangulated points in front
// of the cameras, then records the metric reprojection RMS.
void ResolveCheiralityAndScore(CalibrationResult* result, const Observations& obs);

struct RootDiagnostic {
  int root_index = -1;
  std::optional<ErrorCode> error;
  double projective_residual_px = 0.0;
};

struct AutocalibOutput {
  std::vector<CalibrationResult> results;  // ascending residual_px
  std::vector<RootDiagnostic> diagnostics;
  std::optional<ErrorCode> projective_error;
  int projective_roots = 0;
};

// Metric calibration from one projective triplet.
CalibrationResult CalibrateTriplet(const ProjectiveTriplet& triplet);

// Projective reconstruction followed by the metric upgrade of every root.
// Never throws on degenerate input; failures land in the diagnostics.
AutocalibOutput Autocalibrate(const SixViewCorrespondences& corr);

}  // namespace sixcal
