// Acceptance gates. `acceptance <n> [cli]` runs gate n and prints one
// PASS/FAIL line; the exit status is 0 only for PASS. Gate 8 needs the
// path of the command line tool.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "sixcal/autocalib.hpp"
#include "sixcal/error.hpp"
#include "sixcal/experiments.hpp"
#include "sixcal/robust.hpp"
#include "sixcal/six_point.hpp"
#include "sixcal/synthetic.hpp"

using namespace sixcal;

namespace {

constexpr std::uint64_t kSeed = 1;

int Report(int n, bool ok, const std::string& what) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", n, what.c_str());
  std::fflush(stdout);
  return ok ? 0 : 1;
}

std::string Fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double Percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  return Quantile(v, q);
}

double RelErr(double a, double b) { return std::abs(a - b) / std::abs(b); }

// |S(y)| against the size of its terms.
double RelativeValue(const PolyRow18& row, double l, double m) {
  const PolyRow18 y = MonomialVector(l, m);
  double scale = 0.0;
  for (int k = 0; k < kNumMonomials; ++k) scale += std::abs(row(k) * y(k));
  return scale > 0.0 ? std::abs(row.dot(y)) / scale : 0.0;
}

// Projective triplet of the scene whose sixth point is the true one, with
// the variable scales balanced as the library does before elimination.
bool TrueTriplet(const SyntheticDataset& ds, ProjectiveTriplet* out) {
  std::array<Eigen::Vector4d, 5> x;
  for (int j = 0; j < 5; ++j) x[j] = ds.points[j].homogeneous();
  const Eigen::Vector4d x6 = oracle::FrameTransform(x) * ds.points[5].homogeneous();
  const SixPointSolutionSet s = ProjectiveReconstruction(ExtractCorrespondences(ds));
  double best = 1e300;
  for (const ProjectiveTriplet& t : s.solutions) {
    const double a = oracle::Angle(t.sixth_point, x6);
    if (a < best) {
      best = a;
      *out = t;
    }
  }
  if (!(best < 1e-6)) return false;
  *out = BalanceTripletScale(*out);
  return true;
}

int ZeroNoiseAccuracy() {
  const int n = 10000;
  const std::vector<CalibTrial> t = RunCalibrationTrials(SceneConfig{}, kSeed, n, 0.0);
  // a failed trial counts as an infinite error
  std::vector<double> e;
  int failed = 0;
  for (const CalibTrial& c : t) {
    e.push_back(c.ok ? c.k_err : std::numeric_limits<double>::infinity());
    failed += !c.ok;
  }
  const double med = Percentile(e, 0.5), q99 = Percentile(e, 0.99);
  return Report(1, med <= 1e-6 && q99 <= 1e-3,
                std::to_string(n) + " noiseless trials, median K error" + Fmt(" %.3g", med) +
                    " (<= 1e-6), p99" + Fmt(" %.3g", q99) + " (<= 1e-3), " + std::to_string(failed) +
                    " failed");
}

int OracleEquivalence() {
  const int n = 1000;
  int over_scale = 0, over_poly = 0, raw_over = 0, skipped = 0;
  double worst = 0.0, worst_raw = 0.0, worst_poly = 0.0;
  for (int i = 0; i < n; ++i) {
    const SyntheticDataset ds = GenerateScene(SceneConfig{}, TrialSeed(kSeed, i));
    ProjectiveTriplet t;
    if (!TrueTriplet(ds, &t)) {
      ++skipped;
      ++over_scale;
      continue;
    }
    const oracle::Scales truth = oracle::ScalesFromTruth(t, ds);
    try {
      const ConstraintMatrix c = BuildConstraints(t);
      const auto f0 = BuildF0(c);
      const EliminationResult raw = EliminationPipeline(f0);
      // extraction as the solver runs it: elimination, then the polish
      const auto [l, m] = RefineScales(f0, raw.lambda, raw.mu);
      const double er = std::max(RelErr(l, truth.lambda), RelErr(m, truth.mu));
      const double rr = std::max(RelErr(raw.lambda, truth.lambda), RelErr(raw.mu, truth.mu));
      worst = std::max(worst, er);
      worst_raw = std::max(worst_raw, rr);
      over_scale += !(er <= 1e-8);
      raw_over += !(rr <= 1e-8);
      double pv = 0.0;
      for (int r = 0; r < 6; ++r) pv = std::max(pv, RelativeValue(SubdeterminantPoly(c, r), l, m));
      worst_poly = std::max(worst_poly, pv);
      over_poly += !(pv <= 1e-7);
    } catch (const SolverError&) {
      ++over_scale;
      ++over_poly;
    }
  }
  return Report(2, over_scale == 0 && over_poly == 0,
                std::to_string(n) + " instances, extracted scales vs oracle max rel" +
                    Fmt(" %.3g", worst) + " (" + std::to_string(over_scale) + " over 1e-8), S_i max rel" +
                    Fmt(" %.3g", worst_poly) + " (" + std::to_string(over_poly) +
                    " over 1e-7); elimination before the polish: max" + Fmt(" %.3g", worst_raw) + ", " +
                    std::to_string(raw_over) + " over 1e-8; " + std::to_string(skipped) +
                    " without the true root");
}

// Full 6x6 coefficient grid of det C_i(l, m) interpolated from the oracle
// determinant at Chebyshev nodes; grid(j, k) multiplies l^j m^k.
Eigen::Matrix<long double, 6, 6> FullCoefficients(const ConstraintMatrix& c, int i) {
  using M6 = Eigen::Matrix<long double, 6, 6>;
  std::array<double, 6> nodes;
  for (int k = 0; k < 6; ++k) nodes[k] = std::cos((2 * k + 1) * M_PI / 12.0);
  M6 v, f;
  for (int a = 0; a < 6; ++a) {
    for (int p = 0; p < 6; ++p) v(a, p) = std::pow(static_cast<long double>(nodes[a]), p);
    for (int b = 0; b < 6; ++b) f(a, b) = oracle::SubdeterminantFullPiv(c.D, i, nodes[a], nodes[b]);
  }
  // f = V G V^T
  const M6 vinv = v.inverse();
  return vinv * f * vinv.transpose();
}

int StructuralInvariants() {
  const int n = 1000;
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int bad_struct = 0, bad_eval = 0;
  double worst_struct = 0.0, worst_eval = 0.0, worst_point = 0.0;
  for (int i = 0; i < n; ++i) {
    const SyntheticDataset ds = GenerateScene(SceneConfig{}, TrialSeed(kSeed, i));
    ProjectiveTriplet t;
    if (!TrueTriplet(ds, &t)) {
      ++bad_struct;
      continue;
    }
    const ConstraintMatrix c = BuildConstraints(t);
    for (int r = 0; r < 6; ++r) {
      const auto g = FullCoefficients(c, r);
      const long double top = g.cwiseAbs().maxCoeff();
      const long double omitted =
          std::max({std::abs(g(5, 0)), std::abs(g(0, 5)), std::abs(g(0, 0))});
      const double rs = static_cast<double>(omitted / top);
      worst_struct = std::max(worst_struct, rs);
      bad_struct += !(rs <= 1e-8);

      PolyRow18 row;
      try {
        row = SubdeterminantPoly(c, r);
      } catch (const SolverError&) {
        ++bad_eval;
        continue;
      }
      // the 20 values compared as one vector; pointwise is printed
      Eigen::Matrix<double, 20, 1> direct, poly;
      for (int k = 0; k < 20; ++k) {
        const double l = u(rng), m = u(rng);
        direct(k) = oracle::SubdeterminantFullPiv(c.D, r, l, m);
        poly(k) = EvaluatePoly(row, l, m);
        worst_point = std::max(worst_point, std::abs(poly(k) - direct(k)) / std::abs(direct(k)));
      }
      const double re = (poly - direct).cwiseAbs().maxCoeff() / direct.cwiseAbs().maxCoeff();
      worst_eval = std::max(worst_eval, re);
      bad_eval += !(re <= 1e-9);
    }
  }
  return Report(3, bad_struct == 0 && bad_eval == 0,
                std::to_string(n) + " instances x 6 rows, omitted coefficients max" +
                    Fmt(" %.3g", worst_struct) + " of the largest (<= 1e-8), 20-point agreement max" +
                    Fmt(" %.3g", worst_eval) + " relative to the largest value (<= 1e-9), worst single point" +
                    Fmt(" %.3g", worst_point) + "; " + std::to_string(bad_struct + bad_eval) + " violations");
}

int SixPointSolver() {
  const int n = 10000;
  int bad_angle = 0, bad_count = 0, bad_rms = 0, in_band = 0;
  double worst_angle = 0.0, worst_rms = 0.0;
  for (int i = 0; i < n; ++i) {
    const SyntheticDataset ds = GenerateScene(SceneConfig{}, TrialSeed(kSeed, i));
    std::array<Eigen::Vector4d, 5> x;
    for (int j = 0; j < 5; ++j) x[j] = ds.points[j].homogeneous();
    const Eigen::Vector4d x6 = oracle::FrameTransform(x) * ds.points[5].homogeneous();
    try {
      const SixViewCorrespondences corr = ExtractCorrespondences(ds);
      std::array<ViewQuadric, 3> q;
      for (int v = 0; v < 3; ++v) q[v] = ComputeViewQuadric(corr.views[v]);
      const SixthPointCandidates c = ComputeSixthPointCandidates(q[0], q[1], q[2]);
      double a = 1e300;
      for (const WorldPoint& p : c.points) a = std::min(a, oracle::Angle(p, x6));
      worst_angle = std::max(worst_angle, a);
      bad_angle += !(a <= 1e-8);
      if (std::abs(c.discriminant) > kDiscriminantBand) {
        const int k = static_cast<int>(c.points.size());
        bad_count += !(k == 1 || k == 3);
      } else {
        ++in_band;
      }
      const SixPointSolutionSet s = ProjectiveReconstruction(corr);
      const double rms = s.solutions.front().residual_px;
      worst_rms = std::max(worst_rms, rms);
      bad_rms += !(rms <= 1e-8);
    } catch (const SolverError&) {
      ++bad_angle;
      ++bad_rms;
    }
  }
  return Report(4, bad_angle == 0 && bad_count == 0 && bad_rms == 0,
                std::to_string(n) + " noiseless scenes, worst X6 angle" + Fmt(" %.3g", worst_angle) +
                    " rad (" + std::to_string(bad_angle) + " over 1e-8), " + std::to_string(bad_count) +
                    " counts outside {1,3} (" + std::to_string(in_band) + " in the band), worst RMS" +
                    Fmt(" %.3g", worst_rms) + " px (" + std::to_string(bad_rms) + " over 1e-8)");
}

int NoiseRobustness() {
  const std::vector<double> levels = {0.0, 0.25, 0.5, 0.75, 1.0};
  const int trials = 1000;
  const SweepReport r = RunNoiseSweep(SceneConfig{}, kSeed, levels, trials);
  bool ok = true;
  std::ostringstream detail;
  auto check = [&](const char* name, auto get) {
    detail << name;
    double prev = -1.0;
    for (const SweepRow& row : r.rows) {
      const std::optional<double> m = get(row);
      const double v = m ? *m : std::numeric_limits<double>::quiet_NaN();
      detail << ' ' << Fmt("%.3g", v);
      if (!m || (prev >= 0.0 && v < 0.9 * prev)) ok = false;
      if (m) prev = v;
    }
    detail << "; ";
  };
  check("k_err", [](const SweepRow& w) { return w.k_err.median; });
  check("rot2", [](const SweepRow& w) { return w.rot2_deg.median; });
  check("rot3", [](const SweepRow& w) { return w.rot3_deg.median; });
  check("dir2", [](const SweepRow& w) { return w.dir2_deg.median; });
  check("dir3", [](const SweepRow& w) { return w.dir3_deg.median; });
  const auto k0 = r.rows.front().k_err.median, k1 = r.rows.back().k_err.median;
  const bool ratio = k0 && k1 && *k0 * 1e3 <= *k1;
  detail << "fail rate";
  for (const SweepRow& row : r.rows) detail << ' ' << Fmt("%.3g", row.fail_rate);
  return Report(5, ok && ratio,
                std::to_string(trials) + " trials per level, medians over solved trials at sigma 0..1: " +
                    detail.str() + "; sigma=0 vs sigma=1 K error ratio " +
                    Fmt("%.3g", k0 && k1 ? *k1 / *k0 : 0.0) + " (>= 1e3)");
}

int RobustPipeline() {
  const int seeds = 10;
  std::vector<double> focal, track;
  std::ostringstream detail;
  for (int s = 0; s < seeds; ++s) {
    TrackExperiment e;
    e.track.n_cameras = 20;
    e.track.n_points = 150;
    e.track.outlier_rate = 0.2;
    e.track.noise_px = 1.0;
    e.ransac.n_hypotheses = 200;
    e.ransac.block_size = 50;
    e.seed = kSeed + s;
    const TrackReport r = RunTrackExperiment(e);
    const double f = r.result.accepted > 0 ? 0.5 * (r.result.mean_K(0, 0) + r.result.mean_K(1, 1))
                                           : std::numeric_limits<double>::quiet_NaN();
    focal.push_back(f);
    track.push_back(r.alignment ? r.alignment->rms : std::numeric_limits<double>::infinity());
    detail << ' ' << Fmt("%.4g", f) << '/' << Fmt("%.3g", track.back());
  }
  double mean_f = 0.0;
  for (double f : focal) mean_f += f;
  mean_f /= seeds;
  const double ferr = std::abs(mean_f - 425.0) / 425.0;
  const double worst_track = *std::max_element(track.begin(), track.end());
  return Report(6, ferr <= 0.10 && worst_track <= 0.05,
                std::to_string(seeds) + " seeds, mean focal" + Fmt(" %.4g", mean_f) + " (rel err" +
                    Fmt(" %.3g", ferr) + ", <= 0.10), worst aligned track RMS / radius" +
                    Fmt(" %.3g", worst_track) + " (<= 0.05); per seed focal/track:" + detail.str());
}

int Performance() {
  const std::vector<BenchSample> s = RunBench(SceneConfig{}, kSeed, 300);
  std::vector<double> total;
  for (const BenchSample& b : s) total.push_back(b.total_us);
  const double med = Percentile(total, 0.5);
  return Report(7, med <= 10000.0,
                "median full calibration" + Fmt(" %.0f", med) + " us over 300 scenes (<= 10000 us)");
}

std::string ReadFile(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// bench reports are timings; only the columns that are not are compared
std::string StripTimings(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string trial, roots;
    std::getline(cells, trial, ',');
    std::getline(cells, roots, ',');
    out += trial + "," + roots + "\n";
  }
  return out;
}

int Determinism(const std::string& cli) {
  if (cli.empty()) return Report(8, false, "no command line tool given");
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "sixcal_acceptance";
  fs::create_directories(dir);
  struct Cmd {
    std::string name, args;
    std::vector<std::string> outputs;
    bool timing = false;
  };
  const std::vector<Cmd> cmds = {
      {"synth", "synth --seed 5 --kind track --cameras 6 --points 40 --out {}/a.json", {"a.json"}},
      {"calibrate", "calibrate --in {}/a.json --views 0,1,2 --out {}/b.json", {"b.json"}},
      {"sweep-noise", "sweep-noise --seed 3 --trials 200 --out {}/c.csv --json {}/c.json", {"c.csv", "c.json"}},
      {"error-dist", "error-dist --seed 3 --trials 500 --out {}/d.csv --json {}/d.json", {"d.csv", "d.json"}},
      {"track", "track --seed 3 --cameras 8 --points 80 --hypotheses 40 --block 20 --k-out {}/e.csv "
                "--track-out {}/f.csv --json {}/e.json",
       {"e.csv", "f.csv", "e.json"}},
      {"bench", "bench --seed 3 --trials 20 --out {}/g.csv", {"g.csv"}, true},
  };
  std::vector<std::string> mismatched;
  int runs = 0;
  for (const Cmd& c : cmds) {
    std::string first[3];
    for (int w : {1, 4}) {
      const fs::path sub = dir / ("w" + std::to_string(w));
      fs::create_directories(sub);
      std::string args = c.args;
      for (std::size_t p; (p = args.find("{}")) != std::string::npos;) args.replace(p, 2, sub.string());
      const std::string line =
          "SIXCAL_THREADS=" + std::to_string(w) + " '" + cli + "' " + args + " 2>/dev/null";
      const int rc = std::system(line.c_str());
      ++runs;
      if (rc != 0) {
        mismatched.push_back(c.name + " (exit " + std::to_string(rc) + ")");
        continue;
      }
      for (std::size_t k = 0; k < c.outputs.size(); ++k) {
        std::string text = ReadFile((sub / c.outputs[k]).string());
        if (c.timing) text = StripTimings(text);
        if (w == 1) {
          first[k] = text;
        } else if (text != first[k] || text.empty()) {
          mismatched.push_back(c.name + ":" + c.outputs[k]);
        }
      }
    }
  }
  std::string list;
  for (const std::string& m : mismatched) list += " " + m;
  return Report(8, mismatched.empty(),
                std::to_string(cmds.size()) + " commands run with 1 and 4 workers (" + std::to_string(runs) +
                    " runs), reports byte-identical" +
                    (mismatched.empty() ? std::string() : ", mismatches:" + list) +
                    "; bench compared on its non-timing columns");
}

}  // namespace

int main(int argc, char** argv) {
  const int which = argc > 1 ? std::atoi(argv[1]) : 0;
  const std::string cli = argc > 2 ? argv[2] : "";
  int failed = 0;
  if (which == 0 || which == 1) failed += ZeroNoiseAccuracy();
  if (which == 0 || which == 2) failed += OracleEquivalence();
  if (which == 0 || which == 3) failed += StructuralInvariants();
  if (which == 0 || which == 4) failed += SixPointSolver();
  if (which == 0 || which == 5) failed += NoiseRobustness();
  if (which == 0 || which == 6) failed += RobustPipeline();
  if (which == 0 || which == 7) failed += Performance();
  if (which == 0 || which == 8) failed += Determinism(cli);
  return failed == 0 ? 0 : 1;
}
