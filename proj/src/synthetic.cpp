#include "sixcal/synthetic.hpp"

#include <cmath>
#include <stdexcept>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "sixcal/error.hpp"

namespace sixcal {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Camera at `center` looking at `target`, image y axis pointing along +Y of
// the world, rotated about the optical axis by `roll` radians.
CameraPose LookAt(const Eigen::Vector3d& center, const Eigen::Vector3d& target, double roll) {
  const Eigen::Vector3d z = (target - center).normalized();
  const Eigen::Vector3d x = Eigen::Vector3d::UnitY().cross(z).normalized();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d r;
  r.row(0) = x.transpose();
  r.row(1) = y.transpose();
  r.row(2) = z.transpose();
  r = Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()).toRotationMatrix() * r;
  CameraPose pose;
  pose.R = r;
  pose.t = -r * center;
  return pose;
}

Eigen::Vector3d UniformInBall(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::Vector3d v;
  do {
    v << unit(rng), unit(rng), unit(rng);
  } while (v.squaredNorm() > 1.0);
  return radius * v;
}

bool ProjectInside(const Eigen::Matrix3d& K, const CameraPose& pose, const Eigen::Vector3d& X,
                   double width, double height, Eigen::Vector2d* uv) {
  const Eigen::Vector3d xc = pose.R * X + pose.t;
  if (xc(2) <= 0.0) return false;
  const Eigen::Vector3d h = K * xc;
  *uv = h.head<2>() / h(2);
  return (*uv)(0) >= 0.0 && (*uv)(0) <= width && (*uv)(1) >= 0.0 && (*uv)(1) <= height;
}

void FillObservations(SyntheticDataset* ds) {
  ds->clean.assign(ds->cameras.size(), std::vector<Eigen::Vector2d>(ds->points.size()));
  for (std::size_t i = 0; i < ds->cameras.size(); ++i) {
    for (std::size_t j = 0; j < ds->points.size(); ++j) {
      const Eigen::Vector3d h = ds->K * (ds->cameras[i].R * ds->points[j] + ds->cameras[i].t);
      ds->clean[i][j] = h.head<2>() / h(2);
    }
  }
  ds->observations = ds->clean;
  ds->outlier_mask.assign(ds->cameras.size(), std::vector<bool>(ds->points.size(), false));
}

}  // namespace

Eigen::Matrix3d ReferenceK() {
  Eigen::Matrix3d k;
  k << 425.0, 0.0, 176.0, 0.0, 425.0, 144.0, 0.0, 0.0, 1.0;
  return k;
}

Camera SyntheticDataset::CameraMatrix(int view) const {
  Matrix34d p;
  p << K * cameras[view].R, K * cameras[view].t;
  return Camera(p);
}

std::vector<Camera> SyntheticDataset::CameraMatrices() const {
  std::vector<Camera> out;
  for (int i = 0; i < NumViews(); ++i) out.push_back(CameraMatrix(i));
  return out;
}

std::vector<WorldPoint> SyntheticDataset::HomogeneousPoints() const {
  std::vector<WorldPoint> out;
  for (const auto& p : points) out.push_back(p.homogeneous());
  return out;
}

std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 TrialStream(std::uint64_t master, std::uint64_t index) {
  return std::mt19937_64(MixSeed(MixSeed(master) ^ MixSeed(index + 0x632be59bd9b4e019ULL)));
}

SyntheticDataset GenerateScene(const SceneConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng = TrialStream(seed, 0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  SyntheticDataset ds;
  ds.seed = seed;
  ds.K = cfg.K;
  ds.image_width = cfg.image_width;
  ds.image_height = cfg.image_height;

  const Eigen::Vector3d target(0.0, 0.0, cfg.distance_to_scene);
  const Eigen::Vector3d c1(-0.5 * cfg.baseline, 0.0, 0.0);
  const Eigen::Vector3d c3(0.5 * cfg.baseline, 0.0, 0.0);
  const Eigen::Vector3d c2 = 0.5 * (c1 + c3) + UniformInBall(rng, cfg.mid_camera_amplitude);

  // Optical axes through one common point make the focal length ambiguous,
  // so every camera gets its own aim point near the centroid.
  for (const Eigen::Vector3d& c : {c1, c2, c3}) {
    const Eigen::Vector3d aim = target + UniformInBall(rng, cfg.aim_jitter);
    ds.cameras.push_back(LookAt(c, aim, cfg.max_roll_deg * kDeg * unit(rng)));
  }

  for (int j = 0; j < 6; ++j) {
    bool accepted = false;
    for (int attempt = 0; attempt < cfg.max_resample && !accepted; ++attempt) {
      const Eigen::Vector3d x(cfg.box_half_width * unit(rng), cfg.box_half_height * unit(rng),
                              cfg.distance_to_scene + 0.5 * cfg.scene_depth * unit(rng));
      accepted = true;
      Eigen::Vector2d uv;
      for (const CameraPose& pose : ds.cameras) {
        accepted = accepted && ProjectInside(ds.K, pose, x, cfg.image_width, cfg.image_height, &uv);
      }
      if (accepted) ds.points.push_back(x);
    }
    if (!accepted) {
      throw SolverError(ErrorCode::kResampleExhausted, "could not place a visible scene point");
    }
  }
  FillObservations(&ds);
  return ds;
}

SyntheticDataset AddNoise(const SyntheticDataset& ds, double sigma_px, std::uint64_t seed) {
  if (!(sigma_px >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  SyntheticDataset out = ds;
  out.noise_px = sigma_px;
  if (sigma_px == 0.0) return out;
  std::mt19937_64 rng = TrialStream(seed, 1);
  std::normal_distribution<double> gauss(0.0, sigma_px);
  for (auto& view : out.observations) {
    for (auto& uv : view) {
      const double du = gauss(rng);
      const double dv = gauss(rng);
      uv += Eigen::Vector2d(du, dv);
    }
  }
  return out;
}

SyntheticDataset AddOutliers(const SyntheticDataset& ds, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("outlier rate must be in [0, 1)");
  SyntheticDataset out = ds;
  if (rate == 0.0) return out;
  std::mt19937_64 rng = TrialStream(seed, 2);
  std::bernoulli_distribution pick(rate);
  std::uniform_real_distribution<double> ux(0.0, ds.image_width);
  std::uniform_real_distribution<double> uy(0.0, ds.image_height);
  for (std::size_t i = 0; i < out.observations.size(); ++i) {
    for (std::size_t j = 0; j < out.observations[i].size(); ++j) {
      if (!pick(rng)) continue;
      const double u = ux(rng);
      const double v = uy(rng);
      out.observations[i][j] = Eigen::Vector2d(u, v);
      out.outlier_mask[i][j] = true;
    }
  }
  return out;
}

SyntheticDataset GenerateTrack(const TrackConfig& cfg, std::uint64_t seed) {
  if (cfg.n_cameras < 3) throw std::invalid_argument("a track needs at least 3 cameras");
  if (cfg.n_points < 6) throw std::invalid_argument("a track needs at least 6 points");
  std::mt19937_64 rng = TrialStream(seed, 3);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  SyntheticDataset ds;
  ds.seed = seed;
  ds.K = cfg.K;
  ds.image_width = cfg.image_width;
  ds.image_height = cfg.image_height;
  for (int k = 0; k < cfg.n_cameras; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / cfg.n_cameras;
    const Eigen::Vector3d c(cfg.radius * std::sin(theta), 0.0, -cfg.radius * std::cos(theta));
    const Eigen::Vector3d aim = UniformInBall(rng, cfg.aim_jitter);
    ds.cameras.push_back(LookAt(c, aim, cfg.max_roll_deg * kDeg * unit(rng)));
  }
  for (int j = 0; j < cfg.n_points; ++j) {
    bool accepted = false;
    for (int attempt = 0; attempt < cfg.max_resample && !accepted; ++attempt) {
      const Eigen::Vector3d x = UniformInBall(rng, cfg.cloud_radius);
      accepted = true;
      Eigen::Vector2d uv;
      for (const CameraPose& pose : ds.cameras) {
        if (!ProjectInside(ds.K, pose, x, cfg.image_width, cfg.image_height, &uv)) {
          accepted = false;
          break;
        }
      }
      if (accepted) ds.points.push_back(x);
    }
    if (!accepted) {
      throw SolverError(ErrorCode::kResampleExhausted, "could not place a point visible in all cameras");
    }
  }
  FillObservations(&ds);
  ds = AddNoise(ds, cfg.noise_px, MixSeed(seed) ^ 0x1ULL);
  ds = AddOutliers(ds, cfg.outlier_rate, MixSeed(seed) ^ 0x2ULL);
  return ds;
}

SixViewCorrespondences ExtractCorrespondences(const SyntheticDataset& ds, std::array<int, 3> views,
                                              std::array<int, 6> points) {
  SixViewCorrespondences corr;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 6; ++j) {
      corr.views[i][j] = ds.observations[views[i]][points[j]].homogeneous();
    }
  }
  return corr;
}

SixViewCorrespondences ExtractCorrespondences(const SyntheticDataset& ds) {
  return ExtractCorrespondences(ds, {0, 1, 2}, {0, 1, 2, 3, 4, 5});
}

Eigen::Matrix4d BasisFrameTransform(const std::array<WorldPoint, 5>& pts) {
  Eigen::Matrix4d m;
  for (int j = 0; j < 4; ++j) m.col(j) = pts[j];
  const Eigen::Vector4d c = m.partialPivLu().solve(pts[4]);
  return (m * c.asDiagonal()).inverse();
}

WorldPoint GroundTruthSixthPoint(const SyntheticDataset& ds) {
  std::array<WorldPoint, 5> first;
  for (int j = 0; j < 5; ++j) first[j] = ds.points[j].homogeneous();
  WorldPoint x = BasisFrameTransform(first) * ds.points[5].homogeneous();
  x.normalize();
  FixSign(x);
  return x;
}

OracleScales ComputeOracleScales(const SyntheticDataset& ds, const ProjectiveTriplet& triplet) {
  // G maps projective points to metric points: Y_j ~ G X_j. The metric
  // points are centred and scaled first (mean distance sqrt(3)), which the
  // DLT needs for a well-conditioned system.
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (int j = 0; j < 6; ++j) centroid += ds.points[j];
  centroid /= 6.0;
  double spread = 0.0;
  for (int j = 0; j < 6; ++j) spread += (ds.points[j] - centroid).norm();
  const double scale = std::sqrt(3.0) * 6.0 / spread;
  Eigen::Matrix4d norm = Eigen::Matrix4d::Identity();
  norm.topLeftCorner<3, 3>() *= scale;
  norm.topRightCorner<3, 1>() = -scale * centroid;

  Eigen::Matrix<double, 18, 16> a = Eigen::Matrix<double, 18, 16>::Zero();
  for (int j = 0; j < 6; ++j) {
    const Eigen::RowVector4d x = triplet.points[j].normalized().transpose();
    const Eigen::Vector4d y = norm * ds.points[j].homogeneous();
    for (int r = 0; r < 3; ++r) {
      // y[r] * (G X)[3] - y[3] * (G X)[r] = 0
      a.block<1, 4>(3 * j + r, 12) = y(r) * x;
      a.block<1, 4>(3 * j + r, 4 * r) = -y(3) * x;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  if (!(sv(14) > 1e-10 * sv(0))) {
    throw SolverError(ErrorCode::kDltRankDefect, "point homography is not determined");
  }
  const Eigen::VectorXd g = svd.matrixV().col(15);
  Eigen::Matrix4d gm;
  for (int r = 0; r < 4; ++r) gm.row(r) = g.segment<4>(4 * r).transpose();

  const Eigen::Matrix4d h = gm.inverse() * norm;
  const Eigen::Vector4d diag(1.0, 1.0, 1.0, 0.0);
  Eigen::Matrix4d q = h * diag.asDiagonal() * h.transpose();
  q /= q(2, 2);

  OracleScales out;
  out.Q = q;
  out.x = QuadricToVector(q);
  const Matrix34d& p2 = triplet.cameras[1].P;
  const Matrix34d& p3 = triplet.cameras[2].P;
  out.lambda = (p2 * q * p2.transpose())(2, 2);
  out.mu = (p3 * q * p3.transpose())(2, 2);
  return out;
}

double KError(const Eigen::Matrix3d& K, const Eigen::Matrix3d& K_ref) {
  return (K - K_ref).norm() / K_ref.norm();
}

double RotationAngleDeg(const Eigen::Matrix3d& R) {
  const double c = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  // Near zero the trace formula loses precision; use the skew part.
  const Eigen::Vector3d w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  const double s = 0.5 * w.norm();
  return std::atan2(s, c) / kDeg;
}

double DirectionAngleDeg(const Eigen::Vector3d& t, const Eigen::Vector3d& t_ref) {
  if (!(t_ref.norm() > 1e-12) || !(t.norm() > 0.0)) {
    throw SolverError(ErrorCode::kZeroTranslation, "translation direction undefined");
  }
  const Eigen::Vector3d a = t.normalized();
  const Eigen::Vector3d b = t_ref.normalized();
  return std::atan2(a.cross(b).norm(), a.dot(b)) / kDeg;
}

PoseErrors ComputePoseErrors(const CalibrationResult& result, const SyntheticDataset& ds,
                             std::array<int, 3> views) {
  const CameraPose& p1 = ds.cameras[views[0]];
  auto relative = [&](int v) {
    const CameraPose& pv = ds.cameras[v];
    CameraPose rel;
    rel.R = pv.R * p1.R.transpose();
    rel.t = pv.t - rel.R * p1.t;
    return rel;
  };
  const CameraPose r2 = relative(views[1]);
  const CameraPose r3 = relative(views[2]);
  PoseErrors e;
  e.rot2_deg = RotationAngleDeg(result.R2 * r2.R.transpose());
  e.rot3_deg = RotationAngleDeg(result.R3 * r3.R.transpose());
  e.dir2_deg = DirectionAngleDeg(result.t2, r2.t);
  e.dir3_deg = DirectionAngleDeg(result.t3, r3.t);
  return e;
}

}  // namespace sixcal
