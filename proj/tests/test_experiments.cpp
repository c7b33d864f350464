#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sixcal/dataset_io.hpp"
#include "sixcal/experiments.hpp"

using namespace sixcal;
using nlohmann::json;

namespace {

int CountLines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("sixcal_test_" + name)).string();
}

}  // namespace

TEST(Summarize, EmptySampleHasNoFields) {
  const Summary s = Summarize({});
  EXPECT_EQ(s.count, 0);
  EXPECT_FALSE(s.median.has_value());
  EXPECT_FALSE(s.mean.has_value());
  EXPECT_FALSE(s.q99.has_value());
  const json j = SummaryToJson(s);
  EXPECT_TRUE(j["median"].is_null());
  EXPECT_FALSE(SummaryFromJson(j).median.has_value());
}

TEST(Summarize, OddMedianIsMiddleElement) {
  const Summary s = Summarize({3.0, 1.0, 2.0});
  EXPECT_EQ(s.count, 3);
  EXPECT_EQ(*s.median, 2.0);
  EXPECT_EQ(*s.min, 1.0);
  EXPECT_EQ(*s.max, 3.0);
  EXPECT_EQ(*s.mean, 2.0);
}

TEST(Summarize, LinearInterpolation) {
  const std::vector<double> v = {0.0, 10.0, 20.0, 30.0, 40.0};
  EXPECT_DOUBLE_EQ(Quantile(v, 0.25), 10.0);
  EXPECT_DOUBLE_EQ(Quantile(v, 0.9), 36.0);
  EXPECT_DOUBLE_EQ(Quantile(v, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(Quantile(v, 1.0), 40.0);
  EXPECT_DOUBLE_EQ(*Summarize({1.0, 2.0, 3.0, 4.0}).median, 2.5);
}

TEST(TrialSeed, DistinctAndStable) {
  EXPECT_EQ(TrialSeed(1, 5), TrialSeed(1, 5));
  EXPECT_NE(TrialSeed(1, 5), TrialSeed(1, 6));
  EXPECT_NE(TrialSeed(1, 5), TrialSeed(2, 5));
}

TEST(CalibrationTrial, NoiselessIsAccurate) {
  const CalibTrial t = RunCalibrationTrial(SceneConfig{}, 1, 0, 0.0);
  ASSERT_TRUE(t.ok);
  EXPECT_FALSE(t.error.has_value());
  EXPECT_GE(t.roots, 1);
  EXPECT_GE(t.candidates, 1);
  EXPECT_LE(t.k_err, 1e-6);
  EXPECT_LE(t.rot2_deg, 1e-5);
  EXPECT_LE(t.dir3_deg, 1e-5);
}

TEST(CalibrationTrial, IndependentOfWorkerCount) {
  const auto a = RunCalibrationTrials(SceneConfig{}, 3, 24, 0.5, 1);
  const auto b = RunCalibrationTrials(SceneConfig{}, 3, 24, 0.5, 4);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(ErrorDistReportToJson(3, 0.5, a).dump(), ErrorDistReportToJson(3, 0.5, b).dump());
  EXPECT_EQ(ErrorDistCsv(a), ErrorDistCsv(b));
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].index, k);
}

TEST(CalibTrialJson, RoundTrip) {
  CalibTrial t;
  t.index = 7;
  t.noise_px = 0.25;
  t.ok = false;
  t.error = ErrorCode::kNotPositiveDefinite;
  t.roots = 3;
  t.candidates = 0;
  t.k_err = std::numeric_limits<double>::quiet_NaN();
  const CalibTrial u = CalibTrialFromJson(CalibTrialToJson(t));
  EXPECT_EQ(u.index, 7u);
  EXPECT_EQ(u.noise_px, 0.25);
  EXPECT_FALSE(u.ok);
  ASSERT_TRUE(u.error.has_value());
  EXPECT_EQ(*u.error, ErrorCode::kNotPositiveDefinite);
  EXPECT_EQ(u.roots, 3);
}

TEST(SweepReport, JsonRoundTripAndCsv) {
  const SweepReport r = RunNoiseSweep(SceneConfig{}, 2, {0.0, 0.5}, 10, 1);
  ASSERT_EQ(r.rows.size(), 2u);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[1].size(), 10u);
  const json j = SweepReportToJson(r);
  EXPECT_EQ(j["version"], kReportVersion);
  const SweepReport back = SweepReportFromJson(j);
  EXPECT_EQ(SweepReportToJson(back).dump(), j.dump());
  const std::string csv = SweepCsv(r);
  EXPECT_EQ(CountLines(csv), 3);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "noise_px,k_err_median,rot2_deg_median,rot3_deg_median,dir2_deg_median,dir3_deg_median,"
            "fail_rate");
  // same seed at both levels: the scenes are the same geometries
  EXPECT_LE(*r.rows[0].k_err.median, 1e-6);
  EXPECT_GT(*r.rows[1].k_err.median, *r.rows[0].k_err.median);
}

TEST(SweepReport, MalformedJsonThrows) {
  EXPECT_ANY_THROW(SweepReportFromJson(json::parse(R"({"version": 1})")));
}

TEST(SummarizeLevel, FailuresExcludedFromMedians) {
  std::vector<CalibTrial> t(4);
  for (int k = 0; k < 4; ++k) {
    t[k].index = k;
    t[k].ok = k != 3;
    t[k].k_err = k == 3 ? 1e9 : 0.1 * (k + 1);
  }
  t[3].error = ErrorCode::kNotPositiveDefinite;
  const SweepRow row = SummarizeLevel(1.0, t);
  EXPECT_EQ(row.trials, 4);
  EXPECT_DOUBLE_EQ(row.fail_rate, 0.25);
  EXPECT_DOUBLE_EQ(*row.k_err.median, 0.2);
}

TEST(Bench, CsvRows) {
  const std::vector<BenchSample> s = RunBench(SceneConfig{}, 1, 5);
  ASSERT_EQ(s.size(), 5u);
  for (const BenchSample& b : s) {
    EXPECT_GT(b.total_us, 0.0);
    EXPECT_GE(b.metric_us.size(), 1u);
  }
  const std::string csv = BenchCsv(s);
  EXPECT_EQ(CountLines(csv), 6);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "trial,roots,projective_us,metric_us_mean,total_us");
  const json j = BenchReportToJson(1, s);
  EXPECT_EQ(j["total_us"]["count"], 5);
}

TEST(ErrorDist, CsvColumns) {
  const auto t = RunCalibrationTrials(SceneConfig{}, 4, 6, 0.0, 1);
  const std::string csv = ErrorDistCsv(t);
  EXPECT_EQ(CountLines(csv), 7);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "trial,k_err,log10_k_err,roots,candidates,status");
}

TEST(Track, SmallNoiselessExperiment) {
  TrackExperiment e;
  e.track.n_cameras = 6;
  e.track.n_points = 40;
  e.track.noise_px = 0.0;
  e.track.outlier_rate = 0.0;
  e.ransac.n_hypotheses = 8;
  e.ransac.block_size = 10;
  e.seed = 5;
  const TrackReport r = RunTrackExperiment(e);
  EXPECT_EQ(r.result.accepted, 4);
  EXPECT_LE(r.focal_rel_err, 1e-6);
  ASSERT_TRUE(r.alignment.has_value());
  EXPECT_LE(r.alignment->rms, 1e-5);
  EXPECT_EQ(CountLines(TrackKCsv(r)), 5);
  EXPECT_EQ(CountLines(TrackCentersCsv(r)), 7);
  const json j = TrackReportToJson(e, r);
  EXPECT_EQ(j["version"], kReportVersion);
  EXPECT_EQ(TrackReportToJson(e, RunTrackExperiment(e)).dump(), j.dump());
}

TEST(FormatNumber, RoundTripsAndSpecials) {
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(FormatNumber(v)), v);
  EXPECT_EQ(FormatNumber(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(FormatNumber(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(WriteTextFile, BadPathNamesIt) {
  try {
    WriteTextFile("/nonexistent-dir/x.csv", "a");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.csv"), std::string::npos);
  }
}

TEST(DatasetIo, RoundTrip) {
  SyntheticDataset ds = GenerateScene(SceneConfig{}, 17);
  ds = AddNoise(ds, 0.5, 17);
  const std::string path = TempPath("roundtrip.json");
  SaveDataset(ds, path);
  const SyntheticDataset back = LoadDataset(path);
  std::remove(path.c_str());
  EXPECT_EQ(back.seed, ds.seed);
  EXPECT_EQ(back.K, ds.K);
  EXPECT_EQ(back.noise_px, ds.noise_px);
  ASSERT_EQ(back.NumViews(), 3);
  ASSERT_EQ(back.NumPoints(), 6);
  for (int v = 0; v < 3; ++v) {
    EXPECT_EQ(back.cameras[v].R, ds.cameras[v].R);
    EXPECT_EQ(back.cameras[v].t, ds.cameras[v].t);
    for (int j = 0; j < 6; ++j) {
      EXPECT_EQ(back.observations[v][j], ds.observations[v][j]);
      EXPECT_LE((back.clean[v][j] - ds.clean[v][j]).norm(), 1e-9);
    }
  }
  EXPECT_EQ(back.outlier_mask, ds.outlier_mask);
}

TEST(DatasetIo, SchemaErrorsNameTheField) {
  const json good = DatasetToJson(GenerateScene(SceneConfig{}, 1));
  auto expect_field = [](const json& j, const std::string& field) {
    try {
      DatasetFromJson(j);
      ADD_FAILURE() << "accepted a dataset with a bad " << field;
    } catch (const SchemaError& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  json j = good;
  j.erase("K");
  expect_field(j, "K");
  j = good;
  j["version"] = 99;
  expect_field(j, "version");
  j = good;
  j["observations"].erase(j["observations"].begin());
  expect_field(j, "observations");
  j = good;
  j["observations"].push_back(j["observations"][0]);
  expect_field(j, "observations");
  j = good;
  j["cameras"][0]["R"] = "identity";
  expect_field(j, "R");
}

TEST(DatasetIo, UnparsableText) {
  const std::string path = TempPath("bad.json");
  {
    std::ofstream f(path);
    f << "{ not json";
  }
  try {
    LoadDataset(path);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("not valid JSON"), std::string::npos);
  }
  std::remove(path.c_str());
  EXPECT_THROW(LoadDataset(TempPath("missing.json")), std::runtime_error);
}

TEST(DatasetIo, CalibrationJson) {
  CalibrationResult r;
  r.K = ReferenceK();
  const json j = CalibrationToJson(r);
  ASSERT_TRUE(j.contains("K"));
  EXPECT_EQ(j["K"][0][0], 425.0);
}
