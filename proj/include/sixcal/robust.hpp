#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sixcal/autocalib.hpp"
#include "sixcal/error.hpp"
#include "sixcal/geometry.hpp"

namespace sixcal {

struct RansacConfig {
  int n_hypotheses = 400;
  int block_size = 100;
  double sampson_threshold = 4.0;  // px^2, truncation of the robust score
  std::uint64_t seed = 0;
  // Minimal samples drawn at most this many times the hypothesis budget.
  int max_attempts_factor = 20;
};

// View pairs scored by a hypothesis: (1,2), (2,3), (1,3).
inline constexpr std::array<std::array<int, 2>, 3> kScoredPairs = {{{0, 1}, {1, 2}, {0, 2}}};

struct MotionHypothesis {
  CalibrationResult calibration;
  std::array<Eigen::Matrix3d, 3> F;  // for kScoredPairs, x_b^T F x_a = 0
  std::array<int, 6> sample{};       // window point indices of the minimal sample
  int index = -1;                    // generation order
};

// Fundamental matrix of the pair, x_b^T F x_a = 0, unit Frobenius norm with
// the largest-magnitude entry positive. Throws kCoincidentCenters.
Eigen::Matrix3d PairFundamental(const Camera& pa, const Camera& pb);

// First-order geometric error of the match (xa, xb) under F, in px^2.
double SampsonError(const Eigen::Matrix3d& F, const Eigen::Vector2d& xa, const Eigen::Vector2d& xb);

MotionHypothesis MakeHypothesis(const CalibrationResult& calibration);

// Truncated score of one window point summed over the three pairs.
double PointScore(const MotionHypothesis& h, const Observations& window, int point,
                  double threshold);

// Sum of PointScore over `points` (all points when empty).
double SampsonScore(const MotionHypothesis& h, const Observations& window,
                    std::span<const int> points, double threshold);

// Hypotheses still alive after `scored` observations:
// max(1, floor(n * 2^-floor(scored / block))).
int PreemptionSurvivors(int n_hypotheses, int block_size, int scored);

struct RansacResult {
  MotionHypothesis best;
  double best_score = 0.0;  // over the observations it was scored on
  int hypotheses = 0;
  int attempts = 0;
  std::vector<int> survivors;  // alive after each completed block
};

// Hypotheses from random six-point samples of a three-view window; every
// calibration root fills one slot.
std::vector<MotionHypothesis> GenerateHypotheses(const Observations& window,
                                                 const RansacConfig& cfg, int* attempts);

// Scores observations in random order in blocks and halves the hypothesis
// set after each block. Throws kNoHypothesis.
RansacResult PreemptiveRansac(const Observations& window, const RansacConfig& cfg);

// Same selection on given hypotheses; exposed for testing the schedule.
RansacResult PreemptiveSelect(std::vector<MotionHypothesis> hypotheses,
                              const Observations& window, const RansacConfig& cfg);

struct WindowResult {
  int first_view = 0;
  std::optional<CalibrationResult> calibration;
  std::optional<ErrorCode> error;
  double score = 0.0;
  int hypotheses = 0;
};

struct TrackResult {
  std::vector<WindowResult> windows;
  Eigen::Matrix3d mean_K = Eigen::Matrix3d::Zero();
  int accepted = 0;
  // Chained camera centers in the frame of the first camera; empty
  // entries for cameras that could not be linked.
  std::vector<std::optional<Eigen::Vector3d>> centers;
};

// Three-view windows with stride 1, each solved by PreemptiveRansac with
// its own seed stream; K averaged entrywise over accepted windows and the
// relative poses chained into one track. Throws std::invalid_argument for
// fewer than three views.
TrackResult TrackSequence(const Observations& obs, const RansacConfig& cfg);

struct AlignmentErrors {
  double rms = 0.0;
  double max = 0.0;
  int count = 0;
};

// Least-squares similarity (4x4, scale included) taking the estimated
// centers onto the reference ones, over cameras present in both. Throws
// std::invalid_argument for fewer than three pairs.
Eigen::Matrix4d SimilarityAlignment(const std::vector<std::optional<Eigen::Vector3d>>& estimated,
                                    const std::vector<Eigen::Vector3d>& reference);

// Center errors after the least-squares similarity aligning the estimated
// centers to the reference ones (only cameras present in both).
AlignmentErrors AlignedCenterErrors(const std::vector<std::optional<Eigen::Vector3d>>& estimated,
                                    const std::vector<Eigen::Vector3d>& reference);

}  // namespace sixcal
