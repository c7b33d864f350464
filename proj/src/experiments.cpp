#include "sixcal/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sixcal/parallel.hpp"

namespace sixcal {

namespace {

using nlohmann::json;

json Opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> OptFrom(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::string Cell(const std::optional<double>& v) { return v ? FormatNumber(*v) : std::string(); }

json MatrixToJson(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

std::optional<ErrorCode> ErrorFromName(const std::string& name) {
  for (int c = 0; c <= static_cast<int>(ErrorCode::kNoHypothesis); ++c) {
    if (ErrorCodeName(static_cast<ErrorCode>(c)) == name) return static_cast<ErrorCode>(c);
  }
  return std::nullopt;
}

double Micros(std::chrono::steady_clock::duration d) {
  return std::chrono::duration<double, std::micro>(d).count();
}

}  // namespace

double Quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Summary Summarize(std::vector<double> values) {
  Summary s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.median = Quantile(values, 0.5);
  s.q25 = Quantile(values, 0.25);
  s.q75 = Quantile(values, 0.75);
  s.q90 = Quantile(values, 0.90);
  s.q99 = Quantile(values, 0.99);
  s.min = values.front();
  s.max = values.back();
  return s;
}

std::uint64_t TrialSeed(std::uint64_t master, std::uint64_t index) {
  return MixSeed(MixSeed(master) ^ MixSeed(index + 0x9e3779b97f4a7c15ULL));
}

CalibTrial RunCalibrationTrial(const SceneConfig& cfg, std::uint64_t master, std::uint64_t index,
                               double noise_px) {
  CalibTrial t;
  t.index = index;
  t.noise_px = noise_px;
  const std::uint64_t seed = TrialSeed(master, index);
  try {
    SyntheticDataset ds = GenerateScene(cfg, seed);
    // Same seed at every level: the noise is the same draw scaled by sigma.
    if (noise_px > 0.0) ds = AddNoise(ds, noise_px, seed);
    const AutocalibOutput out = Autocalibrate(ExtractCorrespondences(ds));
    t.roots = out.projective_roots;
    t.candidates = static_cast<int>(out.results.size());
    if (out.results.empty()) {
      if (out.projective_error) {
        t.error = out.projective_error;
      } else {
        t.error = ErrorCode::kEmptySolutionSet;
        for (const RootDiagnostic& d : out.diagnostics) {
          if (d.error) {
            t.error = d.error;
            break;
          }
        }
      }
      return t;
    }
    const CalibrationResult& best = out.results.front();
    t.k_err = KError(best.K, ds.K);
    const PoseErrors pe = ComputePoseErrors(best, ds);
    t.rot2_deg = pe.rot2_deg;
    t.rot3_deg = pe.rot3_deg;
    t.dir2_deg = pe.dir2_deg;
    t.dir3_deg = pe.dir3_deg;
    t.ok = true;
  } catch (const SolverError& e) {
    t.ok = false;
    t.error = e.code();
  }
  return t;
}

std::vector<CalibTrial> RunCalibrationTrials(const SceneConfig& cfg, std::uint64_t master, int n,
                                             double noise_px, int workers) {
  if (n < 0) throw std::invalid_argument("trial count must be non-negative");
  std::vector<CalibTrial> out(static_cast<std::size_t>(n));
  ParallelFor(out.size(), [&](std::size_t i) {
    out[i] = RunCalibrationTrial(cfg, master, i, noise_px);
  }, workers);
  return out;
}

SweepRow SummarizeLevel(double noise_px, const std::vector<CalibTrial>& trials) {
  SweepRow row;
  row.noise_px = noise_px;
  row.trials = static_cast<int>(trials.size());
  std::vector<double> k, r2, r3, d2, d3;
  int failed = 0;
  for (const CalibTrial& t : trials) {
    if (!t.ok) {
      ++failed;
      continue;
    }
    k.push_back(t.k_err);
    r2.push_back(t.rot2_deg);
    r3.push_back(t.rot3_deg);
    d2.push_back(t.dir2_deg);
    d3.push_back(t.dir3_deg);
  }
  row.k_err = Summarize(std::move(k));
  row.rot2_deg = Summarize(std::move(r2));
  row.rot3_deg = Summarize(std::move(r3));
  row.dir2_deg = Summarize(std::move(d2));
  row.dir3_deg = Summarize(std::move(d3));
  row.fail_rate = trials.empty() ? 0.0 : static_cast<double>(failed) / trials.size();
  return row;
}

SweepReport RunNoiseSweep(const SceneConfig& cfg, std::uint64_t master,
                          const std::vector<double>& levels, int trials, int workers) {
  SweepReport r;
  r.seed = master;
  r.trials_per_level = trials;
  for (double sigma : levels) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("noise levels must be non-negative");
    r.records.push_back(RunCalibrationTrials(cfg, master, trials, sigma, workers));
    r.rows.push_back(SummarizeLevel(sigma, r.records.back()));
  }
  return r;
}

std::vector<BenchSample> RunBench(const SceneConfig& cfg, std::uint64_t master, int trials) {
  using Clock = std::chrono::steady_clock;
  std::vector<BenchSample> out;
  for (int i = 0; i < trials; ++i) {
    const SyntheticDataset ds = GenerateScene(cfg, TrialSeed(master, i));
    const SixViewCorrespondences corr = ExtractCorrespondences(ds);
    Observations obs(3, std::vector<Eigen::Vector2d>(6));
    for (int v = 0; v < 3; ++v) {
      for (int j = 0; j < 6; ++j) obs[v][j] = Dehomogenize(corr.views[v][j]);
    }
    BenchSample s;
    const auto t0 = Clock::now();
    SixPointSolutionSet proj;
    try {
      proj = ProjectiveReconstruction(corr);
    } catch (const SolverError&) {
      s.projective_us = Micros(Clock::now() - t0);
      s.total_us = s.projective_us;
      out.push_back(s);
      continue;
    }
    s.projective_us = Micros(Clock::now() - t0);
    s.total_us = s.projective_us;
    for (const ProjectiveTriplet& trip : proj.solutions) {
      const auto t1 = Clock::now();
      try {
        CalibrationResult res = CalibrateTriplet(trip);
        ResolveCheiralityAndScore(&res, obs);
      } catch (const SolverError&) {
        // failed roots still cost time
      }
      const double us = Micros(Clock::now() - t1);
      s.metric_us.push_back(us);
      s.total_us += us;
    }
    out.push_back(s);
  }
  return out;
}

TrackReport RunTrackExperiment(const TrackExperiment& exp) {
  TrackReport r;
  r.dataset = GenerateTrack(exp.track, exp.seed);
  RansacConfig rc = exp.ransac;
  rc.seed = MixSeed(exp.seed ^ 0x5851f42d4c957f2dULL);
  r.result = TrackSequence(r.dataset.observations, rc);

  const double f_ref = 0.5 * (exp.track.K(0, 0) + exp.track.K(1, 1));
  const double f_est = 0.5 * (r.result.mean_K(0, 0) + r.result.mean_K(1, 1));
  r.focal_rel_err = r.result.accepted > 0 ? std::abs(f_est - f_ref) / f_ref
                                          : std::numeric_limits<double>::infinity();

  std::vector<Eigen::Vector3d> truth;
  for (const CameraPose& c : r.dataset.cameras) truth.push_back(c.Center());
  r.aligned_centers.assign(r.result.centers.size(), std::nullopt);
  int linked = 0;
  for (const auto& c : r.result.centers) linked += c.has_value();
  if (linked >= 3) {
    const Eigen::Matrix4d t = SimilarityAlignment(r.result.centers, truth);
    AlignmentErrors e;
    double sum = 0.0;
    for (std::size_t k = 0; k < r.result.centers.size(); ++k) {
      if (!r.result.centers[k]) continue;
      const Eigen::Vector3d p =
          t.topLeftCorner<3, 3>() * *r.result.centers[k] + t.topRightCorner<3, 1>();
      r.aligned_centers[k] = p;
      const double d = (p - truth[k]).norm() / exp.track.radius;
      sum += d * d;
      e.max = std::max(e.max, d);
      ++e.count;
    }
    e.rms = std::sqrt(sum / e.count);
    r.alignment = e;
  }
  return r;
}

json SummaryToJson(const Summary& s) {
  return json{{"count", s.count}, {"mean", Opt(s.mean)}, {"median", Opt(s.median)},
              {"q25", Opt(s.q25)}, {"q75", Opt(s.q75)},   {"q90", Opt(s.q90)},
              {"q99", Opt(s.q99)}, {"min", Opt(s.min)},   {"max", Opt(s.max)}};
}

Summary SummaryFromJson(const json& j) {
  Summary s;
  s.count = j.at("count").get<int>();
  s.mean = OptFrom(j, "mean");
  s.median = OptFrom(j, "median");
  s.q25 = OptFrom(j, "q25");
  s.q75 = OptFrom(j, "q75");
  s.q90 = OptFrom(j, "q90");
  s.q99 = OptFrom(j, "q99");
  s.min = OptFrom(j, "min");
  s.max = OptFrom(j, "max");
  return s;
}

json CalibTrialToJson(const CalibTrial& t) {
  json j{{"index", t.index}, {"noise_px", t.noise_px}, {"ok", t.ok},
         {"roots", t.roots}, {"candidates", t.candidates}};
  j["error"] = t.error ? json(std::string(ErrorCodeName(*t.error))) : json(nullptr);
  if (t.ok) {
    j["k_err"] = t.k_err;
    j["rot2_deg"] = t.rot2_deg;
    j["rot3_deg"] = t.rot3_deg;
    j["dir2_deg"] = t.dir2_deg;
    j["dir3_deg"] = t.dir3_deg;
  }
  return j;
}

CalibTrial CalibTrialFromJson(const json& j) {
  CalibTrial t;
  t.index = j.at("index").get<std::uint64_t>();
  t.noise_px = j.at("noise_px").get<double>();
  t.ok = j.at("ok").get<bool>();
  t.roots = j.at("roots").get<int>();
  t.candidates = j.at("candidates").get<int>();
  if (!j.at("error").is_null()) t.error = ErrorFromName(j.at("error").get<std::string>());
  if (t.ok) {
    t.k_err = j.at("k_err").get<double>();
    t.rot2_deg = j.at("rot2_deg").get<double>();
    t.rot3_deg = j.at("rot3_deg").get<double>();
    t.dir2_deg = j.at("dir2_deg").get<double>();
    t.dir3_deg = j.at("dir3_deg").get<double>();
  }
  return t;
}

json SweepReportToJson(const SweepReport& r) {
  json rows = json::array();
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const SweepRow& row = r.rows[i];
    json trials = json::array();
    if (i < r.records.size()) {
      for (const CalibTrial& t : r.records[i]) trials.push_back(CalibTrialToJson(t));
    }
    rows.push_back({{"noise_px", row.noise_px},
                    {"trials", row.trials},
                    {"fail_rate", row.fail_rate},
                    {"k_err", SummaryToJson(row.k_err)},
                    {"rot2_deg", SummaryToJson(row.rot2_deg)},
                    {"rot3_deg", SummaryToJson(row.rot3_deg)},
                    {"dir2_deg", SummaryToJson(row.dir2_deg)},
                    {"dir3_deg", SummaryToJson(row.dir3_deg)},
                    {"records", trials}});
  }
  return json{{"version", kReportVersion},
              {"kind", "sweep-noise"},
              {"seed", r.seed},
              {"trials_per_level", r.trials_per_level},
              {"levels", rows}};
}

SweepReport SweepReportFromJson(const json& j) {
  SweepReport r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.trials_per_level = j.at("trials_per_level").get<int>();
  for (const json& lv : j.at("levels")) {
    SweepRow row;
    row.noise_px = lv.at("noise_px").get<double>();
    row.trials = lv.at("trials").get<int>();
    row.fail_rate = lv.at("fail_rate").get<double>();
    row.k_err = SummaryFromJson(lv.at("k_err"));
    row.rot2_deg = SummaryFromJson(lv.at("rot2_deg"));
    row.rot3_deg = SummaryFromJson(lv.at("rot3_deg"));
    row.dir2_deg = SummaryFromJson(lv.at("dir2_deg"));
    row.dir3_deg = SummaryFromJson(lv.at("dir3_deg"));
    std::vector<CalibTrial> trials;
    for (const json& t : lv.at("records")) trials.push_back(CalibTrialFromJson(t));
    r.rows.push_back(row);
    r.records.push_back(std::move(trials));
  }
  return r;
}

std::string SweepCsv(const SweepReport& r) {
  std::ostringstream os;
  os << "noise_px,k_err_median,rot2_deg_median,rot3_deg_median,dir2_deg_median,"
        "dir3_deg_median,fail_rate\n";
  for (const SweepRow& row : r.rows) {
    os << FormatNumber(row.noise_px) << ',' << Cell(row.k_err.median) << ','
       << Cell(row.rot2_deg.median) << ',' << Cell(row.rot3_deg.median) << ','
       << Cell(row.dir2_deg.median) << ',' << Cell(row.dir3_deg.median) << ','
       << FormatNumber(row.fail_rate) << '\n';
  }
  return os.str();
}

json ErrorDistReportToJson(std::uint64_t seed, double noise_px,
                           const std::vector<CalibTrial>& trials) {
  const SweepRow row = SummarizeLevel(noise_px, trials);
  json recs = json::array();
  for (const CalibTrial& t : trials) recs.push_back(CalibTrialToJson(t));
  return json{{"version", kReportVersion}, {"kind", "error-dist"},
              {"seed", seed},              {"noise_px", noise_px},
              {"trials", trials.size()},   {"fail_rate", row.fail_rate},
              {"k_err", SummaryToJson(row.k_err)}, {"records", recs}};
}

std::string ErrorDistCsv(const std::vector<CalibTrial>& trials) {
  std::ostringstream os;
  os << "trial,k_err,log10_k_err,roots,candidates,status\n";
  for (const CalibTrial& t : trials) {
    os << t.index << ',';
    if (t.ok) {
      os << FormatNumber(t.k_err) << ','
         << (t.k_err > 0.0 ? FormatNumber(std::log10(t.k_err)) : std::string());
    } else {
      os << ',';
    }
    os << ',' << t.roots << ',' << t.candidates << ','
       << (t.ok ? std::string("ok") : std::string(ErrorCodeName(*t.error))) << '\n';
  }
  return os.str();
}

json BenchReportToJson(std::uint64_t seed, const std::vector<BenchSample>& samples) {
  std::vector<double> proj, metric, total, roots;
  for (const BenchSample& s : samples) {
    proj.push_back(s.projective_us);
    total.push_back(s.total_us);
    roots.push_back(static_cast<double>(s.metric_us.size()));
    metric.insert(metric.end(), s.metric_us.begin(), s.metric_us.end());
  }
  return json{{"version", kReportVersion},
              {"kind", "bench"},
              {"seed", seed},
              {"trials", samples.size()},
              {"note", "indicative wall-clock timings, single thread, microseconds"},
              {"projective_us", SummaryToJson(Summarize(proj))},
              {"metric_per_root_us", SummaryToJson(Summarize(metric))},
              {"total_us", SummaryToJson(Summarize(total))},
              {"roots", SummaryToJson(Summarize(roots))}};
}

std::string BenchCsv(const std::vector<BenchSample>& samples) {
  std::ostringstream os;
  os << "trial,roots,projective_us,metric_us_mean,total_us\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const BenchSample& s = samples[i];
    double m = 0.0;
    for (double v : s.metric_us) m += v;
    os << i << ',' << s.metric_us.size() << ',' << FormatNumber(s.projective_us) << ','
       << (s.metric_us.empty() ? std::string() : FormatNumber(m / s.metric_us.size())) << ','
       << FormatNumber(s.total_us) << '\n';
  }
  return os.str();
}

json TrackReportToJson(const TrackExperiment& exp, const TrackReport& r) {
  json windows = json::array();
  for (const WindowResult& w : r.result.windows) {
    json jw{{"first_view", w.first_view}, {"hypotheses", w.hypotheses}, {"score", w.score}};
    jw["error"] = w.error ? json(std::string(ErrorCodeName(*w.error))) : json(nullptr);
    jw["K"] = w.calibration ? MatrixToJson(w.calibration->K) : json(nullptr);
    windows.push_back(jw);
  }
  json j{{"version", kReportVersion},
         {"kind", "track"},
         {"seed", exp.seed},
         {"config",
          {{"n_cameras", exp.track.n_cameras},
           {"n_points", exp.track.n_points},
           {"radius", exp.track.radius},
           {"outlier_rate", exp.track.outlier_rate},
           {"noise_px", exp.track.noise_px},
           {"n_hypotheses", exp.ransac.n_hypotheses},
           {"block_size", exp.ransac.block_size},
           {"sampson_threshold", exp.ransac.sampson_threshold}}},
         {"accepted", r.result.accepted},
         {"mean_K", MatrixToJson(r.result.mean_K)},
         {"true_K", MatrixToJson(exp.track.K)},
         {"focal_rel_err", r.focal_rel_err},
         {"windows", windows}};
  if (r.alignment) {
    j["track"] = {{"rms_over_radius", r.alignment->rms},
                  {"max_over_radius", r.alignment->max},
                  {"linked", r.alignment->count}};
  } else {
    j["track"] = nullptr;
  }
  return j;
}

std::string TrackKCsv(const TrackReport& r) {
  std::ostringstream os;
  os << "window,fx,skew,cx,fy,cy,status\n";
  for (const WindowResult& w : r.result.windows) {
    os << w.first_view << ',';
    if (w.calibration) {
      const Eigen::Matrix3d& k = w.calibration->K;
      os << FormatNumber(k(0, 0)) << ',' << FormatNumber(k(0, 1)) << ',' << FormatNumber(k(0, 2))
         << ',' << FormatNumber(k(1, 1)) << ',' << FormatNumber(k(1, 2)) << ",ok\n";
    } else {
      os << ",,,,," << (w.error ? ErrorCodeName(*w.error) : "failed") << '\n';
    }
  }
  return os.str();
}

std::string TrackCentersCsv(const TrackReport& r) {
  std::ostringstream os;
  os << "camera,x,y,z,true_x,true_y,true_z\n";
  for (std::size_t k = 0; k < r.dataset.cameras.size(); ++k) {
    const Eigen::Vector3d c = r.dataset.cameras[k].Center();
    os << k << ',';
    if (k < r.aligned_centers.size() && r.aligned_centers[k]) {
      const Eigen::Vector3d& p = *r.aligned_centers[k];
      os << FormatNumber(p.x()) << ',' << FormatNumber(p.y()) << ',' << FormatNumber(p.z());
    } else {
      os << ",,";
    }
    os << ',' << FormatNumber(c.x()) << ',' << FormatNumber(c.y()) << ',' << FormatNumber(c.z())
       << '\n';
  }
  return os.str();
}

void WriteTextFile(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << content;
  f.close();
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string FormatNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace sixcal
