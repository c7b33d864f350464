#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "sixcal/autocalib.hpp"
#include "sixcal/geometry.hpp"

namespace sixcal {

// Calibration matrix of the reference synthetic setup.
Eigen::Matrix3d ReferenceK();

struct SceneConfig {
  double distance_to_scene = 1.0;
  double scene_depth = 0.5;
  double baseline = 0.1;
  double mid_camera_amplitude = 0.025;
  double image_width = 352.0;
  double image_height = 288.0;
  Eigen::Matrix3d K = ReferenceK();
  // Half extents of the point box across the optical axis.
  double box_half_width = 0.25;
  double box_half_height = 0.2;
  double max_roll_deg = 5.0;
  // Radius of the ball around the centroid from which each camera's aim
  // point is drawn.
  double aim_jitter = 0.1;
  int max_resample = 1000;
};

struct TrackConfig {
  int n_cameras = 70;
  int n_points = 400;
  double radius = 1.0;
  double cloud_radius = 0.25;
  double outlier_rate = 0.2;
  double noise_px = 1.0;
  double image_width = 352.0;
  double image_height = 288.0;
  Eigen::Matrix3d K = ReferenceK();
  double aim_jitter = 0.1;
  double max_roll_deg = 5.0;
  int max_resample = 1000;
};

struct CameraPose {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  Eigen::Vector3d Center() const { return -R.transpose() * t; }
};

struct SyntheticDataset {
  std::uint64_t seed = 0;
  Eigen::Matrix3d K = ReferenceK();
  double image_width = 352.0;
  double image_height = 288.0;
  std::vector<CameraPose> cameras;
  std::vector<Eigen::Vector3d> points;
  Observations clean;         // exact projections
  Observations observations;  // after noise and outliers
  std::vector<std::vector<bool>> outlier_mask;
  double noise_px = 0.0;

  int NumViews() const { return static_cast<int>(cameras.size()); }
  int NumPoints() const { return static_cast<int>(points.size()); }
  Camera CameraMatrix(int view) const;
  std::vector<Camera> CameraMatrices() const;
  std::vector<WorldPoint> HomogeneousPoints() const;
};

// splitmix64 finalizer, used to derive independent streams.
std::uint64_t MixSeed(std::uint64_t x);

// Generator for trial `index` under `master`; streams are independent of the
// order in which trials are run.
std::mt19937_64 TrialStream(std::uint64_t master, std::uint64_t index);

// Three cameras, six points, reference geometry. Throws kResampleExhausted.
SyntheticDataset GenerateScene(const SceneConfig& cfg, std::uint64_t seed);

// Per-coordinate i.i.d. Gaussian offsets on `observations`.
SyntheticDataset AddNoise(const SyntheticDataset& ds, double sigma_px, std::uint64_t seed);

// Replaces a Bernoulli(rate) subset of observations by uniform image points.
SyntheticDataset AddOutliers(const SyntheticDataset& ds, double rate, std::uint64_t seed);

// Cameras on a circle looking at a central point cloud, with the noise and
// outliers of `cfg` applied. Throws kResampleExhausted.
SyntheticDataset GenerateTrack(const TrackConfig& cfg, std::uint64_t seed);

// Correspondences for three views and six points of a dataset.
SixViewCorrespondences ExtractCorrespondences(const SyntheticDataset& ds,
                                              std::array<int, 3> views,
                                              std::array<int, 6> points);
SixViewCorrespondences ExtractCorrespondences(const SyntheticDataset& ds);

// T with T*X_j ~ e_j (j < 4) and T*X_5 ~ (1,1,1,1).
Eigen::Matrix4d BasisFrameTransform(const std::array<WorldPoint, 5>& pts);

// Ground-truth sixth point in the frame where the first five points are
// the projective basis.
WorldPoint GroundTruthSixthPoint(const SyntheticDataset& ds);

struct OracleScales {
  double lambda = 0.0;
  double mu = 0.0;
  Vector10d x = Vector10d::Zero();
  Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();  // Q(2,2) == 1
};

// Absolute dual quadric of a projective triplet computed from ground truth:
// the homography carrying the triplet's points onto the metric points,
// applied to diag(1,1,1,0). Throws kDltRankDefect.
OracleScales ComputeOracleScales(const SyntheticDataset& ds, const ProjectiveTriplet& triplet);

// |K - K_ref|_F / |K_ref|_F.
double KError(const Eigen::Matrix3d& K, const Eigen::Matrix3d& K_ref);

struct PoseErrors {
  double rot2_deg = 0.0;
  double rot3_deg = 0.0;
  double dir2_deg = 0.0;
  double dir3_deg = 0.0;
};

double RotationAngleDeg(const Eigen::Matrix3d& R);

// Direction error in degrees. Throws kZeroTranslation.
double DirectionAngleDeg(const Eigen::Vector3d& t, const Eigen::Vector3d& t_ref);

// Errors of the poses of views 2 and 3 relative to view 1, against the
// ground-truth relative poses of `views`.
PoseErrors ComputePoseErrors(const CalibrationResult& result, const SyntheticDataset& ds,
                             std::array<int, 3> views = {0, 1, 2});

}  // namespace sixcal
