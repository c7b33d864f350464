#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sixcal/numeric.hpp"

namespace sixcal {

using ImagePoint = Eigen::Vector3d;  // homogeneous pixel coordinates (u, v, w)
using WorldPoint = Eigen::Vector4d;  // homogeneous (X, Y, Z, W)

// Pixel observations indexed [view][point].
using Observations = std::vector<std::vector<Eigen::Vector2d>>;

struct Camera {
  Matrix34d P = Matrix34d::Zero();

  Camera() = default;
  explicit Camera(const Matrix34d& p) : P(p) {}

  auto A() const { return P.leftCols<3>(); }
  auto a() const { return P.col(3); }
};

// Three views of six points. Point j of view i is views[i][j].
struct SixViewCorrespondences {
  std::array<std::array<ImagePoint, 6>, 3> views;
};

// Cameras in the frame where the first camera is [I | 0]. `points` are the
// six world points expressed in that same frame; `sixth_point` is X6 in the
// frame where X1..X5 are the standard projective basis (before H0).
struct ProjectiveTriplet {
  std::array<Camera, 3> cameras;
  std::array<WorldPoint, 6> points;
  WorldPoint sixth_point = WorldPoint::Zero();
  Eigen::Matrix4d h0 = Eigen::Matrix4d::Identity();
  double residual_px = 0.0;
};

// Condition-number bound for A1 when forming H0.
inline constexpr double kMaxFirstCameraCondition = 1e12;

// Homogeneous P * X. Throws kPointAtCameraCenter when P * X ~ 0.
ImagePoint Project(const Camera& cam, const WorldPoint& x, double tol = kDefaultTol);

// Homography T with T*x1 ~ e1, T*x2 ~ e2, T*x3 ~ e3, T*x4 ~ (1,1,1), unit
// Frobenius norm and positive largest entry. Throws kDegenerateQuad when
// three of the points are collinear.
Eigen::Matrix3d CanonicalPlaneBasis(const ImagePoint& x1, const ImagePoint& x2,
                                    const ImagePoint& x3, const ImagePoint& x4,
                                    double tol = 1e-10);

// The four world points e1..e4 and (1,1,1,1).
std::array<WorldPoint, 5> ProjectiveBasisPoints();

// H0 = [A1^-1, -A1^-1 a1; 0, 1]. Throws kSingularFirstCamera.
Eigen::Matrix4d FirstCameraNormalizer(const Camera& p1);

// Transforms the three cameras by H0 so the first becomes [I | 0] exactly,
// and the world points by H0^-1 so every projection is preserved.
ProjectiveTriplet ApplyH0(const Camera& p1, const Camera& p2, const Camera& p3,
                          std::span<const WorldPoint> points = {});

// Pixel coordinates of a homogeneous projection. Throws
// kProjectionAtInfinity when |w| is negligible.
Eigen::Vector2d Dehomogenize(const ImagePoint& x, double tol = kDefaultTol);

// Root-mean-square pixel distance between projections of pts through cams
// and obs[view][point].
double ReprojectionRms(std::span<const Camera> cams, std::span<const WorldPoint> pts,
                       const Observations& obs);

// Linear (DLT) triangulation from any number of views.
WorldPoint TriangulateDlt(std::span<const Camera> cams, std::span<const Eigen::Vector2d> obs);

// Angle in radians between the lines spanned by two homogeneous vectors.
double HomogeneousAngle(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

Eigen::Matrix3d Skew(const Eigen::Vector3d& v);

}  // namespace sixcal
