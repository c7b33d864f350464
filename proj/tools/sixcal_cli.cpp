#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sixcal/autocalib.hpp"
#include "sixcal/dataset_io.hpp"
#include "sixcal/experiments.hpp"
#include "sixcal/synthetic.hpp"

namespace {

using nlohmann::json;
using namespace sixcal;

// Four significant digits for the human-readable summaries on stderr.
std::string Short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string MedianOf(const json& summary) {
  return summary["median"].is_null() ? "n/a" : Short(summary["median"].get<double>());
}

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSolver = 2;

// Writes to the path, or stdout for "" and "-".
void Emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    WriteTextFile(path, content);
  }
}

struct SynthArgs {
  std::uint64_t seed = 0;
  std::string out;
  std::string kind = "scene";
  double noise = 0.0;
  double outliers = 0.0;
  int cameras = 20;
  int points = 150;
  double radius = 1.0;
};

int RunSynth(const SynthArgs& a) {
  SyntheticDataset ds;
  if (a.kind == "track") {
    TrackConfig tc;
    tc.n_cameras = a.cameras;
    tc.n_points = a.points;
    tc.radius = a.radius;
    tc.noise_px = a.noise;
    tc.outlier_rate = a.outliers;
    ds = GenerateTrack(tc, a.seed);
  } else {
    ds = GenerateScene(SceneConfig{}, a.seed);
    if (a.noise > 0.0) ds = AddNoise(ds, a.noise, a.seed);
    if (a.outliers > 0.0) ds = AddOutliers(ds, a.outliers, a.seed);
  }
  Emit(a.out, DatasetToJson(ds).dump(2) + "\n");
  return kExitOk;
}

struct CalibrateArgs {
  std::string in;
  std::string out;
  std::vector<int> views = {0, 1, 2};
  std::vector<int> points = {0, 1, 2, 3, 4, 5};
};

int RunCalibrate(const CalibrateArgs& a) {
  const SyntheticDataset ds = LoadDataset(a.in);
  std::array<int, 3> views{};
  std::array<int, 6> points{};
  for (int k = 0; k < 3; ++k) {
    if (a.views[k] < 0 || a.views[k] >= ds.NumViews()) {
      throw CLI::ValidationError("--views", "view index out of range");
    }
    views[k] = a.views[k];
  }
  for (int k = 0; k < 6; ++k) {
    if (a.points[k] < 0 || a.points[k] >= ds.NumPoints()) {
      throw CLI::ValidationError("--points", "point index out of range");
    }
    points[k] = a.points[k];
  }

  const AutocalibOutput out = Autocalibrate(ExtractCorrespondences(ds, views, points));
  json report{{"version", kReportVersion}, {"dataset_seed", ds.seed},
              {"views", views},            {"points", points},
              {"projective_roots", out.projective_roots}};
  report["projective_error"] =
      out.projective_error ? json(std::string(ErrorCodeName(*out.projective_error))) : json(nullptr);
  json diags = json::array();
  for (const RootDiagnostic& d : out.diagnostics) {
    diags.push_back({{"root", d.root_index},
                     {"projective_residual_px", d.projective_residual_px},
                     {"error", d.error ? json(std::string(ErrorCodeName(*d.error))) : json(nullptr)}});
  }
  report["diagnostics"] = diags;
  json cands = json::array();
  for (const CalibrationResult& r : out.results) {
    json c = CalibrationToJson(r);
    c["k_err"] = KError(r.K, ds.K);
    cands.push_back(c);
  }
  report["candidates"] = cands;
  report["best"] = cands.empty() ? json(nullptr) : cands[0];
  Emit(a.out, report.dump(2) + "\n");
  if (out.results.empty()) {
    std::cerr << "calibrate: no calibration candidate survived\n";
    return kExitSolver;
  }
  return kExitOk;
}

struct SweepArgs {
  std::uint64_t seed = 0;
  int trials = 1000;
  std::vector<double> levels = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::string out;
  std::string json_out;
};

int RunSweep(const SweepArgs& a) {
  const SweepReport r = RunNoiseSweep(SceneConfig{}, a.seed, a.levels, a.trials);
  Emit(a.out, SweepCsv(r));
  if (!a.json_out.empty()) WriteTextFile(a.json_out, SweepReportToJson(r).dump(1) + "\n");
  return kExitOk;
}

struct ErrorDistArgs {
  std::uint64_t seed = 0;
  int trials = 10000;
  double noise = 0.0;
  std::string out;
  std::string json_out;
};

int RunErrorDist(const ErrorDistArgs& a) {
  const std::vector<CalibTrial> trials = RunCalibrationTrials(SceneConfig{}, a.seed, a.trials, a.noise);
  Emit(a.out, ErrorDistCsv(trials));
  if (!a.json_out.empty()) {
    WriteTextFile(a.json_out, ErrorDistReportToJson(a.seed, a.noise, trials).dump(1) + "\n");
  }
  return kExitOk;
}

struct TrackArgs {
  std::uint64_t seed = 0;
  TrackExperiment exp;
  std::string k_out;
  std::string track_out;
  std::string json_out;
};

int RunTrack(TrackArgs a) {
  a.exp.seed = a.seed;
  const TrackReport r = RunTrackExperiment(a.exp);
  Emit(a.k_out, TrackKCsv(r));
  if (!a.track_out.empty()) WriteTextFile(a.track_out, TrackCentersCsv(r));
  const json j = TrackReportToJson(a.exp, r);
  if (!a.json_out.empty()) WriteTextFile(a.json_out, j.dump(1) + "\n");
  std::cerr << "track: " << r.result.accepted << "/" << r.result.windows.size()
            << " windows accepted, focal rel err " << Short(r.focal_rel_err);
  if (r.alignment) std::cerr << ", track rms/radius " << Short(r.alignment->rms);
  std::cerr << "\n";
  if (r.result.accepted == 0) return kExitSolver;
  return kExitOk;
}

struct BenchArgs {
  std::uint64_t seed = 0;
  int trials = 1000;
  std::string out;
  std::string json_out;
};

int RunBenchCmd(const BenchArgs& a) {
  const std::vector<BenchSample> s = RunBench(SceneConfig{}, a.seed, a.trials);
  Emit(a.out, BenchCsv(s));
  const json j = BenchReportToJson(a.seed, s);
  if (!a.json_out.empty()) WriteTextFile(a.json_out, j.dump(1) + "\n");
  std::cerr << "bench (indicative): median projective " << MedianOf(j["projective_us"])
            << " us, metric per root " << MedianOf(j["metric_per_root_us"]) << " us, total "
            << MedianOf(j["total_us"]) << " us\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Six-point three-view camera auto-calibration and experiments.\n"
               "Thread count: SIXCAL_THREADS (default: hardware concurrency)."};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Write a synthetic dataset as JSON");
  c_synth->add_option("--seed", synth.seed, "Dataset seed");
  c_synth->add_option("--out", synth.out, "Output path (default stdout)");
  c_synth->add_option("--kind", synth.kind, "scene (three views, six points) or track")
      ->check(CLI::IsMember({"scene", "track"}));
  c_synth->add_option("--noise", synth.noise, "Gaussian pixel noise sigma")->check(CLI::NonNegativeNumber);
  c_synth->add_option("--outliers", synth.outliers, "Outlier rate")->check(CLI::Range(0.0, 1.0));
  c_synth->add_option("--cameras", synth.cameras, "Track cameras")->check(CLI::Range(3, 100000));
  c_synth->add_option("--points", synth.points, "Track points")->check(CLI::Range(6, 10000000));
  c_synth->add_option("--radius", synth.radius, "Track circle radius")->check(CLI::PositiveNumber);

  CalibrateArgs cal;
  auto* c_cal = app.add_subcommand("calibrate", "Calibrate from three views of six points");
  c_cal->add_option("--in", cal.in, "Dataset JSON")->required();
  c_cal->add_option("--out", cal.out, "Result JSON path (default stdout)");
  c_cal->add_option("--views", cal.views, "Three view indices")->expected(3)->delimiter(',');
  c_cal->add_option("--points", cal.points, "Six point indices")->expected(6)->delimiter(',');

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep-noise", "Errors against pixel noise");
  c_sweep->add_option("--seed", sweep.seed, "Master seed");
  c_sweep->add_option("--trials", sweep.trials, "Trials per level")->check(CLI::Range(1, 100000000));
  c_sweep->add_option("--levels", sweep.levels, "Noise levels in px")->delimiter(',');
  c_sweep->add_option("--out", sweep.out, "CSV path (default stdout)");
  c_sweep->add_option("--json", sweep.json_out, "JSON report path");

  ErrorDistArgs ed;
  auto* c_ed = app.add_subcommand("error-dist", "Per-trial calibration error distribution");
  c_ed->add_option("--seed", ed.seed, "Master seed");
  c_ed->add_option("--trials", ed.trials, "Number of trials")->check(CLI::Range(1, 100000000));
  c_ed->add_option("--noise", ed.noise, "Pixel noise sigma")->check(CLI::NonNegativeNumber);
  c_ed->add_option("--out", ed.out, "CSV path (default stdout)");
  c_ed->add_option("--json", ed.json_out, "JSON report path");

  TrackArgs tr;
  tr.exp.track.n_cameras = 20;
  tr.exp.track.n_points = 150;
  tr.exp.ransac.n_hypotheses = 200;
  tr.exp.ransac.block_size = 50;
  auto* c_tr = app.add_subcommand("track", "Preemptive RANSAC over a camera sequence");
  c_tr->add_option("--seed", tr.seed, "Seed");
  c_tr->add_option("--cameras", tr.exp.track.n_cameras, "Cameras on the circle")->check(CLI::Range(3, 100000));
  c_tr->add_option("--points", tr.exp.track.n_points, "Scene points")->check(CLI::Range(6, 10000000));
  c_tr->add_option("--radius", tr.exp.track.radius, "Circle radius")->check(CLI::PositiveNumber);
  c_tr->add_option("--outliers", tr.exp.track.outlier_rate, "Outlier rate")->check(CLI::Range(0.0, 1.0));
  c_tr->add_option("--noise", tr.exp.track.noise_px, "Pixel noise sigma")->check(CLI::NonNegativeNumber);
  c_tr->add_option("--hypotheses", tr.exp.ransac.n_hypotheses, "Hypotheses per window")->check(CLI::Range(1, 1000000));
  c_tr->add_option("--block", tr.exp.ransac.block_size, "Preemption block size")->check(CLI::Range(1, 1000000));
  c_tr->add_option("--threshold", tr.exp.ransac.sampson_threshold, "Score truncation in px^2")
      ->check(CLI::PositiveNumber);
  c_tr->add_option("--k-out", tr.k_out, "Per-window K CSV (default stdout)");
  c_tr->add_option("--track-out", tr.track_out, "Aligned camera centers CSV");
  c_tr->add_option("--json", tr.json_out, "JSON report path");

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "Indicative single-thread timings");
  c_bench->add_option("--seed", bench.seed, "Master seed");
  c_bench->add_option("--trials", bench.trials, "Number of scenes")->check(CLI::Range(1, 100000000));
  c_bench->add_option("--out", bench.out, "CSV path (default stdout)");
  c_bench->add_option("--json", bench.json_out, "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*c_synth) return RunSynth(synth);
    if (*c_cal) return RunCalibrate(cal);
    if (*c_sweep) return RunSweep(sweep);
    if (*c_ed) return RunErrorDist(ed);
    if (*c_tr) return RunTrack(tr);
    if (*c_bench) return RunBenchCmd(bench);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n" << kDatasetSchemaText;
    return kExitUsage;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
