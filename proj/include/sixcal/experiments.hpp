#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sixcal/error.hpp"
#include "sixcal/robust.hpp"
#include "sixcal/synthetic.hpp"

namespace sixcal {

inline constexpr int kReportVersion = 1;

// Order statistics of a sample; every field is empty for an empty sample.
// Quantiles use linear interpolation between order statistics, so the
// median of an odd-sized sample is its middle element.
struct Summary {
  int count = 0;
  std::optional<double> mean, median, q25, q75, q90, q99, min, max;
};

Summary Summarize(std::vector<double> values);
double Quantile(const std::vector<double>& sorted, double q);

// One Table-1 scene solved by Autocalibrate; errors of the best-ranked
// candidate against ground truth.
struct CalibTrial {
  std::uint64_t index = 0;
  double noise_px = 0.0;
  bool ok = false;
  std::optional<ErrorCode> error;  // set when no candidate survived
  int roots = 0;
  int candidates = 0;
  double k_err = 0.0;
  double rot2_deg = 0.0;
  double rot3_deg = 0.0;
  double dir2_deg = 0.0;
  double dir3_deg = 0.0;
};

// Scene seed of trial `index`; shared across noise levels so that a sweep
// compares the same geometries.
std::uint64_t TrialSeed(std::uint64_t master, std::uint64_t index);

CalibTrial RunCalibrationTrial(const SceneConfig& cfg, std::uint64_t master, std::uint64_t index,
                               double noise_px);

// Trials 0..n-1, run on `workers` threads (0: WorkerCount()); the result is
// independent of the worker count.
std::vector<CalibTrial> RunCalibrationTrials(const SceneConfig& cfg, std::uint64_t master, int n,
                                             double noise_px, int workers = 0);

struct SweepRow {
  double noise_px = 0.0;
  int trials = 0;
  Summary k_err, rot2_deg, rot3_deg, dir2_deg, dir3_deg;
  double fail_rate = 0.0;
};

// Summaries over the successful trials of one noise level.
SweepRow SummarizeLevel(double noise_px, const std::vector<CalibTrial>& trials);

struct SweepReport {
  std::uint64_t seed = 0;
  int trials_per_level = 0;
  std::vector<SweepRow> rows;
  std::vector<std::vector<CalibTrial>> records;  // per level
};

SweepReport RunNoiseSweep(const SceneConfig& cfg, std::uint64_t master,
                          const std::vector<double>& levels, int trials, int workers = 0);

struct BenchSample {
  double projective_us = 0.0;
  std::vector<double> metric_us;  // per projective root
  double total_us = 0.0;
};

std::vector<BenchSample> RunBench(const SceneConfig& cfg, std::uint64_t master, int trials);

struct TrackExperiment {
  TrackConfig track;
  RansacConfig ransac;
  std::uint64_t seed = 0;
};

struct TrackReport {
  TrackResult result;
  SyntheticDataset dataset;
  std::optional<AlignmentErrors> alignment;  // relative to the circle radius
  std::vector<std::optional<Eigen::Vector3d>> aligned_centers;
  double focal_rel_err = 0.0;                // |mean(fx, fy) - f| / f
};

TrackReport RunTrackExperiment(const TrackExperiment& exp);

// JSON and CSV emitters. CSV columns are fixed; numbers use 17 significant
// digits and empty cells stand for missing values.
nlohmann::json SummaryToJson(const Summary& s);
Summary SummaryFromJson(const nlohmann::json& j);
nlohmann::json CalibTrialToJson(const CalibTrial& t);
CalibTrial CalibTrialFromJson(const nlohmann::json& j);

nlohmann::json SweepReportToJson(const SweepReport& r);
SweepReport SweepReportFromJson(const nlohmann::json& j);
std::string SweepCsv(const SweepReport& r);

nlohmann::json ErrorDistReportToJson(std::uint64_t seed, double noise_px,
                                     const std::vector<CalibTrial>& trials);
std::string ErrorDistCsv(const std::vector<CalibTrial>& trials);

nlohmann::json BenchReportToJson(std::uint64_t seed, const std::vector<BenchSample>& samples);
std::string BenchCsv(const std::vector<BenchSample>& samples);

nlohmann::json TrackReportToJson(const TrackExperiment& exp, const TrackReport& r);
std::string TrackKCsv(const TrackReport& r);
std::string TrackCentersCsv(const TrackReport& r);

// Writes `content` to `path`; throws std::runtime_error naming the path.
void WriteTextFile(const std::string& path, const std::string& content);

std::string FormatNumber(double v);

}  // namespace sixcal
