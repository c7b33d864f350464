#include "sixcal/six_point.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "sixcal/error.hpp"

namespace sixcal {

namespace {

// Monomial slots.
constexpr int kXY = 0, kXZ = 1, kXW = 2, kYZ = 3, kYW = 4, kZW = 5;

// Slot of the monomial x_i * x_j, i != j.
int PairSlot(int i, int j) {
  static constexpr int kSlot[4][4] = {
      {-1, kXY, kXZ, kXW}, {kXY, -1, kYZ, kYW}, {kXZ, kYZ, -1, kZW}, {kXW, kYW, kZW, -1}};
  return kSlot[i][j];
}

constexpr double kCoordTol = 1e-10;
constexpr double kBasisCoincidence = 1e-6;  // radians
constexpr double kRepeatedCandidate = 1e-10;  // radians, after refinement

}  // namespace

double ViewQuadric::Evaluate(const WorldPoint& x) const { return coeffs.dot(CrossMonomials(x)); }

Vector6d CrossMonomials(const WorldPoint& x) {
  Vector6d m;
  m << x(0) * x(1), x(0) * x(2), x(0) * x(3), x(1) * x(2), x(1) * x(3), x(2) * x(3);
  return m;
}

ViewQuadric ComputeViewQuadric(std::span<const ImagePoint, 6> points) {
  // Degeneracy checks only; the frame itself is redone in long double since
  // the intersection of three quadrics can amplify rounding here by 1e6.
  CanonicalPlaneBasis(points[0], points[1], points[2], points[3]);
  using Vec3l = Eigen::Matrix<long double, 3, 1>;
  using Mat3l = Eigen::Matrix<long double, 3, 3>;
  Mat3l m;
  for (int k = 0; k < 3; ++k) m.col(k) = points[k].normalized().cast<long double>();
  const Vec3l c = m.partialPivLu().solve(Vec3l(points[3].normalized().cast<long double>()));
  const Eigen::PartialPivLU<Mat3l> g(m * c.asDiagonal());
  const Vec3l x5 = g.solve(Vec3l(points[4].normalized().cast<long double>())).normalized();
  const Vec3l x6 = g.solve(Vec3l(points[5].normalized().cast<long double>())).normalized();
  if ((x5.cwiseAbs().array() <= kCoordTol).any() || (x6.cwiseAbs().array() <= kCoordTol).any()) {
    throw SolverError(ErrorCode::kDegenerateView, "point lies on a line of the canonical frame");
  }
  const long double u = x5(0), v = x5(1), w = x5(2);
  const long double p = x6(0), q = x6(1), r = x6(2);

  // Camera family [[a,0,0,d],[0,b,0,d],[0,0,c,d]] with (a+d, b+d, c+d) =
  // k (u, v, w). The incidence equations of x6 are k*L1 + d*L2 = 0 and
  // k*L3 + d*L4 = 0 with the linear forms below; Q = L1 L2 - L3 L4.
  using Vec4l = Eigen::Matrix<long double, 4, 1>;
  const Vec4l l1(q * u, -p * v, 0.0L, 0.0L);
  const Vec4l l2(0.0L, -r, q, r - q);
  const Vec4l l3(0.0L, r * v, -q * w, 0.0L);
  const Vec4l l4(-q, p, 0.0L, q - p);

  Eigen::Matrix<long double, 6, 1> coeffs;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      coeffs(PairSlot(i, j)) = l1(i) * l2(j) + l1(j) * l2(i) - l3(i) * l4(j) - l3(j) * l4(i);
    }
  }
  const long double n = coeffs.norm();
  if (!(n > 0.0L)) throw SolverError(ErrorCode::kDegenerateView, "vanishing view quadric");
  ViewQuadric out;
  out.coeffs = (coeffs / n).cast<double>();
  FixSign(out.coeffs);
  return out;
}

bool PointFromCrossMonomials(const Vector6d& m_in, WorldPoint* x) {
  // X_a^2 = m_ab * m_ac / m_bc. Pick the anchor a and pair (b, c) whose
  // three entries have the largest minimum magnitude.
  int best_a = -1, best_b = -1, best_c = -1;
  double best_min = -1.0;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      for (int c = b + 1; c < 4; ++c) {
        if (b == a || c == a) continue;
        const double mn = std::min({std::abs(m_in(PairSlot(a, b))), std::abs(m_in(PairSlot(a, c))),
                                    std::abs(m_in(PairSlot(b, c)))});
        if (mn > best_min) {
          best_min = mn;
          best_a = a;
          best_b = b;
          best_c = c;
        }
      }
    }
  }
  const double scale = m_in.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || best_min <= kCoordTol * scale) return false;

  Vector6d m = m_in / scale;
  double sq = m(PairSlot(best_a, best_b)) * m(PairSlot(best_a, best_c)) / m(PairSlot(best_b, best_c));
  if (sq < 0.0) {
    // m is projective; the negated vector has real square roots.
    m = -m;
    sq = -sq;
  }
  const double anchor = std::sqrt(sq);
  WorldPoint out;
  for (int k = 0; k < 4; ++k) out(k) = k == best_a ? anchor : m(PairSlot(best_a, k)) / anchor;
  if (!out.allFinite()) return false;
  out.normalize();
  FixSign(out);
  *x = out;
  return true;
}

namespace {

// Newton on the three quadrics, steps kept orthogonal to x. The cubic route
// loses digits near a double root; the quadric system usually does not.
WorldPoint RefineOnQuadrics(const std::array<Vector6d, 3>& q, WorldPoint x) {
  auto residual = [&](const WorldPoint& y) {
    const Vector6d m = CrossMonomials(y);
    return Eigen::Vector3d(q[0].dot(m), q[1].dot(m), q[2].dot(m));
  };
  x.normalize();
  Eigen::Vector3d f = residual(x);
  for (int it = 0; it < 8 && f.norm() > 0.0; ++it) {
    Eigen::Matrix4d a;
    for (int v = 0; v < 3; ++v) {
      const Vector6d& c = q[v];
      a(v, 0) = c(kXY) * x(1) + c(kXZ) * x(2) + c(kXW) * x(3);
      a(v, 1) = c(kXY) * x(0) + c(kYZ) * x(2) + c(kYW) * x(3);
      a(v, 2) = c(kXZ) * x(0) + c(kYZ) * x(1) + c(kZW) * x(3);
      a(v, 3) = c(kXW) * x(0) + c(kYW) * x(1) + c(kZW) * x(2);
    }
    a.row(3) = x.transpose();
    Eigen::Vector4d rhs;
    rhs << -f, 0.0;
    const Eigen::Vector4d step = a.fullPivLu().solve(rhs);
    if (!step.allFinite()) break;
    const WorldPoint y = (x + step).normalized();
    const Eigen::Vector3d g = residual(y);
    if (!(g.norm() < f.norm())) break;
    x = y;
    f = g;
  }
  return x;
}

}  // namespace

SixthPointCandidates ComputeSixthPointCandidates(const ViewQuadric& q1, const ViewQuadric& q2,
                                                 const ViewQuadric& q3) {
  Eigen::Matrix<double, 3, 6> stack;
  stack.row(0) = q1.coeffs.transpose();
  stack.row(1) = q2.coeffs.transpose();
  stack.row(2) = q3.coeffs.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stack, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  if (!(sv(2) > 1e-10 * sv(0))) {
    throw SolverError(ErrorCode::kRankDefect, "view quadrics are linearly dependent");
  }
  const Eigen::Matrix<double, 6, 3> basis = svd.matrixV().rightCols<3>();

  // Rank-1 consistency of the monomials as conics on nullspace coordinates.
  Matrix6d g1 = Matrix6d::Zero(), g2 = Matrix6d::Zero();
  g1(kXY, kZW) = g1(kZW, kXY) = 0.5;
  g1(kXZ, kYW) = g1(kYW, kXZ) = -0.5;
  g2(kXZ, kYW) = g2(kYW, kXZ) = 0.5;
  g2(kXW, kYZ) = g2(kYZ, kXW) = -0.5;
  const Eigen::Matrix3d k1 = basis.transpose() * g1 * basis;
  const Eigen::Matrix3d k2 = basis.transpose() * g2 * basis;

  // (1,...,1) is the monomial vector of the fifth basis point.
  const Eigen::Vector3d s0 = (basis.transpose() * Vector6d::Ones()).normalized();

  Eigen::JacobiSVD<Eigen::Matrix<double, 1, 3>> perp(s0.transpose(), Eigen::ComputeFullV);
  const Eigen::Vector3d da = perp.matrixV().col(1);
  const Eigen::Vector3d db = perp.matrixV().col(2);

  // Along s = t*s0 + d the second intersection with conic j is at
  // t = -K_j(d) / (2 B_j(s0, d)); equal for both conics where
  // B1(s0,d) K2(d) - B2(s0,d) K1(d) = 0, a cubic in d = phi*da + psi*db.
  const double b1a = s0.dot(k1 * da), b1b = s0.dot(k1 * db);
  const double b2a = s0.dot(k2 * da), b2b = s0.dot(k2 * db);
  const double k1aa = da.dot(k1 * da), k1ab = da.dot(k1 * db), k1bb = db.dot(k1 * db);
  const double k2aa = da.dot(k2 * da), k2ab = da.dot(k2 * db), k2bb = db.dot(k2 * db);

  const double c3 = b1a * k2aa - b2a * k1aa;
  const double c2 = 2.0 * b1a * k2ab + b1b * k2aa - 2.0 * b2a * k1ab - b2b * k1aa;
  const double c1 = b1a * k2bb + 2.0 * b1b * k2ab - b2a * k1bb - 2.0 * b2b * k1ab;
  const double c0 = b1b * k2bb - b2b * k1bb;

  SixthPointCandidates out;
  out.discriminant = NormalizedCubicDiscriminant(c3, c2, c1, c0);

  std::vector<Eigen::Vector3d> directions;
  if (std::abs(c3) >= std::abs(c0)) {
    for (double x : CubicRealRoots(c3, c2, c1, c0)) directions.push_back(x * da + db);
  } else {
    for (double y : CubicRealRoots(c0, c1, c2, c3)) directions.push_back(da + y * db);
  }
  out.cubic_real_roots = static_cast<int>(directions.size());

  const std::array<Vector6d, 3> unit = {q1.coeffs.normalized(), q2.coeffs.normalized(),
                                         q3.coeffs.normalized()};
  const auto basis_points = ProjectiveBasisPoints();
  int coincident = 0;
  for (const Eigen::Vector3d& d : directions) {
    const double bj1 = s0.dot(k1 * d), bj2 = s0.dot(k2 * d);
    const double t = std::abs(bj1) >= std::abs(bj2) ? -d.dot(k1 * d) / (2.0 * bj1)
                                                    : -d.dot(k2 * d) / (2.0 * bj2);
    if (!std::isfinite(t)) continue;
    const Vector6d m = basis * (t * s0 + d);
    WorldPoint x;
    if (!PointFromCrossMonomials(m, &x)) continue;
    const bool on_basis = std::any_of(basis_points.begin(), basis_points.end(), [&](const WorldPoint& b) {
      return HomogeneousAngle(x, b) < kBasisCoincidence;
    });
    if (on_basis) {
      ++coincident;
      continue;
    }
    x = RefineOnQuadrics(unit, x);
    const bool repeated = std::any_of(out.points.begin(), out.points.end(), [&](const WorldPoint& y) {
      return HomogeneousAngle(x, y) < kRepeatedCandidate;
    });
    if (!repeated) out.points.push_back(x);
  }
  if (out.points.empty()) {
    if (coincident > 0) {
      throw SolverError(ErrorCode::kBasisPointCoincidence, "all candidates coincide with basis points");
    }
    throw SolverError(ErrorCode::kNoRealCandidate, "no cubic root yields a real sixth point");
  }
  return out;
}

Camera ResectCamera(std::span<const ImagePoint, 6> view_points,
                    std::span<const WorldPoint, 6> world_points) {
  // Image points are centred and scaled (mean distance sqrt(2)) first; in
  // raw pixels the DLT loses several digits.
  std::array<Eigen::Vector2d, 6> px;
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  bool finite = true;
  for (int j = 0; j < 6; ++j) {
    finite = finite && view_points[j](2) != 0.0;
    if (finite) px[j] = view_points[j].hnormalized();
    if (finite) centroid += px[j];
  }
  Eigen::Matrix3d norm = Eigen::Matrix3d::Identity();
  if (finite) {
    centroid /= 6.0;
    double spread = 0.0;
    for (int j = 0; j < 6; ++j) spread += (px[j] - centroid).norm();
    if (spread > 0.0) {
      const double scale = std::sqrt(2.0) * 6.0 / spread;
      norm(0, 0) = norm(1, 1) = scale;
      norm.topRightCorner<2, 1>() = -scale * centroid;
    }
  }

  Eigen::Matrix<double, 18, 12> a = Eigen::Matrix<double, 18, 12>::Zero();
  for (int j = 0; j < 6; ++j) {
    const Eigen::RowVector4d xt = world_points[j].normalized().transpose();
    const Eigen::Vector3d x = norm * view_points[j];
    const double u = x(0), v = x(1), w = x(2);
    // Rows of x cross (P X) = 0 in the row-major entries of P.
    a.block<1, 4>(3 * j, 4) = -w * xt;
    a.block<1, 4>(3 * j, 8) = v * xt;
    a.block<1, 4>(3 * j + 1, 0) = w * xt;
    a.block<1, 4>(3 * j + 1, 8) = -u * xt;
    a.block<1, 4>(3 * j + 2, 0) = -v * xt;
    a.block<1, 4>(3 * j + 2, 4) = u * xt;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  if (!(sv(10) > 1e-10 * sv(0))) {
    throw SolverError(ErrorCode::kRankDefect, "resection system has rank below 11");
  }
  Eigen::VectorXd p = svd.matrixV().col(11);
  Matrix34d cam;
  for (int r = 0; r < 3; ++r) cam.row(r) = p.segment<4>(4 * r).transpose();
  cam = norm.inverse() * cam;
  cam /= cam.norm();
  FixSign(cam);
  return Camera(cam);
}

SixPointSolutionSet ProjectiveReconstruction(const SixViewCorrespondences& corr) {
  std::array<ViewQuadric, 3> quadrics;
  for (int i = 0; i < 3; ++i) quadrics[i] = ComputeViewQuadric(corr.views[i]);
  const SixthPointCandidates cands = ComputeSixthPointCandidates(quadrics[0], quadrics[1], quadrics[2]);

  Observations obs(3, std::vector<Eigen::Vector2d>(6));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 6; ++j) obs[i][j] = Dehomogenize(corr.views[i][j]);
  }

  SixPointSolutionSet out;
  out.discriminant = cands.discriminant;
  out.cubic_real_roots = cands.cubic_real_roots;
  out.candidate_count = static_cast<int>(cands.points.size());

  const auto basis = ProjectiveBasisPoints();
  for (const WorldPoint& x6 : cands.points) {
    std::array<WorldPoint, 6> world;
    std::copy(basis.begin(), basis.end(), world.begin());
    world[5] = x6;
    try {
      std::array<Camera, 3> cams;
      for (int i = 0; i < 3; ++i) cams[i] = ResectCamera(corr.views[i], world);
      ProjectiveTriplet triplet = ApplyH0(cams[0], cams[1], cams[2], world);
      triplet.sixth_point = x6;
      triplet.residual_px = ReprojectionRms(triplet.cameras, triplet.points, obs);
      if (!std::isfinite(triplet.residual_px)) continue;
      out.solutions.push_back(std::move(triplet));
    } catch (const SolverError&) {
      continue;
    }
  }
  if (out.solutions.empty()) {
    throw SolverError(ErrorCode::kEmptySolutionSet, "no sixth-point candidate could be resected");
  }
  std::stable_sort(out.solutions.begin(), out.solutions.end(),
                   [](const ProjectiveTriplet& a, const ProjectiveTriplet& b) {
                     return a.residual_px < b.residual_px;
                   });
  return out;
}

}  // namespace sixcal
