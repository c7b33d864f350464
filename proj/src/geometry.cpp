#include "sixcal/geometry.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "sixcal/error.hpp"

namespace sixcal {

ImagePoint Project(const Camera& cam, const WorldPoint& x, double tol) {
  const ImagePoint y = cam.P * x;
  const double scale = cam.P.norm() * x.norm();
  if (!(y.norm() > tol * scale)) {
    throw SolverError(ErrorCode::kPointAtCameraCenter, "point coincides with the camera center");
  }
  return y;
}

Eigen::Matrix3d CanonicalPlaneBasis(const ImagePoint& x1, const ImagePoint& x2,
                                    const ImagePoint& x3, const ImagePoint& x4, double tol) {
  const std::array<Eigen::Vector3d, 4> u = {x1.normalized(), x2.normalized(), x3.normalized(),
                                            x4.normalized()};
  constexpr int kTriples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  for (const auto& t : kTriples) {
    Eigen::Matrix3d m;
    m << u[t[0]], u[t[1]], u[t[2]];
    if (!(std::abs(m.determinant()) > tol)) {
      throw SolverError(ErrorCode::kDegenerateQuad, "three of the four basis points are collinear");
    }
  }
  Eigen::Matrix3d m;
  m << u[0], u[1], u[2];
  const Eigen::Vector3d c = m.partialPivLu().solve(u[3]);
  const Eigen::Matrix3d g = m * c.asDiagonal();
  Eigen::Matrix3d t = g.inverse();
  t /= t.norm();
  FixSign(t);
  return t;
}

std::array<WorldPoint, 5> ProjectiveBasisPoints() {
  return {WorldPoint::UnitX(), WorldPoint::UnitY(), WorldPoint::UnitZ(), WorldPoint::UnitW(),
          WorldPoint::Ones()};
}

Eigen::Matrix4d FirstCameraNormalizer(const Camera& p1) {
  const Eigen::Matrix3d a = p1.A();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(a);
  const Eigen::Vector3d sv = svd.singularValues();
  if (!(sv(2) > 0.0) || sv(0) / sv(2) > kMaxFirstCameraCondition) {
    throw SolverError(ErrorCode::kSingularFirstCamera, "left 3x3 block of the first camera is singular");
  }
  const Eigen::Matrix3d a_inv = a.inverse();
  Eigen::Matrix4d h0 = Eigen::Matrix4d::Identity();
  h0.topLeftCorner<3, 3>() = a_inv;
  h0.topRightCorner<3, 1>() = -a_inv * p1.a();
  return h0;
}

ProjectiveTriplet ApplyH0(const Camera& p1, const Camera& p2, const Camera& p3,
                          std::span<const WorldPoint> points) {
  ProjectiveTriplet out;
  out.h0 = FirstCameraNormalizer(p1);
  out.cameras[0].P.setZero();
  out.cameras[0].P.leftCols<3>().setIdentity();
  out.cameras[1].P = p2.P * out.h0;
  out.cameras[2].P = p3.P * out.h0;

  if (!points.empty()) {
    // H0^-1 = [A1, a1; 0, 1].
    Eigen::Matrix4d h0_inv = Eigen::Matrix4d::Identity();
    h0_inv.topRows<3>() = p1.P;
    for (std::size_t j = 0; j < points.size() && j < out.points.size(); ++j) {
      out.points[j] = h0_inv * points[j];
    }
  }
  return out;
}

Eigen::Vector2d Dehomogenize(const ImagePoint& x, double tol) {
  if (!(std::abs(x(2)) > tol * x.norm())) {
    throw SolverError(ErrorCode::kProjectionAtInfinity, "projection lies at infinity");
  }
  return x.head<2>() / x(2);
}

double ReprojectionRms(std::span<const Camera> cams, std::span<const WorldPoint> pts,
                       const Observations& obs) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < cams.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const Eigen::Vector2d proj = Dehomogenize(cams[i].P * pts[j]);
      sum += (proj - obs[i][j]).squaredNorm();
      ++n;
    }
  }
  return n == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(n));
}

WorldPoint TriangulateDlt(std::span<const Camera> cams, std::span<const Eigen::Vector2d> obs) {
  Eigen::MatrixXd a(2 * cams.size(), 4);
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const Matrix34d p = cams[i].P / cams[i].P.norm();
    a.row(2 * i) = obs[i](0) * p.row(2) - p.row(0);
    a.row(2 * i + 1) = obs[i](1) * p.row(2) - p.row(1);
  }
  return MinSingularVector(a);
}

double HomogeneousAngle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double c = std::abs(a.normalized().dot(b.normalized()));
  // acos is ill-conditioned near 1, so go through the sine.
  const Eigen::VectorXd an = a.normalized();
  const Eigen::VectorXd bn = b.normalized() * (a.dot(b) < 0 ? -1.0 : 1.0);
  const double s = (an - bn).norm();
  return c > 0.9 ? 2.0 * std::asin(std::min(1.0, 0.5 * s)) : std::acos(c);
}

Eigen::Matrix3d Skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v(2), v(1), v(2), 0, -v(0), -v(1), v(0), 0;
  return s;
}

}  // namespace sixcal
