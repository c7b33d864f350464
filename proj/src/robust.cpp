#include "sixcal/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "sixcal/numeric.hpp"
#include "sixcal/parallel.hpp"
#include "sixcal/synthetic.hpp"

namespace sixcal {

namespace {

constexpr double kCenterTol = 1e-10;

Eigen::Vector3d Homogeneous(const Eigen::Vector2d& x) { return Eigen::Vector3d(x(0), x(1), 1.0); }

std::uint64_t WindowSeed(std::uint64_t master, int window) {
  return MixSeed(MixSeed(master) + static_cast<std::uint64_t>(window));
}

}  // namespace

Eigen::Matrix3d PairFundamental(const Camera& pa, const Camera& pb) {
  const Eigen::Vector4d ca = MinSingularVector(pa.P);
  const Eigen::Vector3d eb = pb.P * ca;
  if (eb.norm() <= kCenterTol * pb.P.norm()) {
    throw SolverError(ErrorCode::kCoincidentCenters, "camera centers coincide");
  }
  const Eigen::Matrix<double, 4, 3> pa_pinv =
      pa.P.transpose() * (pa.P * pa.P.transpose()).inverse();
  Eigen::Matrix3d f = Skew(eb) * pb.P * pa_pinv;
  const double n = f.norm();
  if (!(n > 0.0) || !f.allFinite()) {
    throw SolverError(ErrorCode::kCoincidentCenters, "degenerate fundamental matrix");
  }
  f /= n;
  FixSign(f);
  return f;
}

double SampsonError(const Eigen::Matrix3d& F, const Eigen::Vector2d& xa,
                    const Eigen::Vector2d& xb) {
  const Eigen::Vector3d a = Homogeneous(xa);
  const Eigen::Vector3d b = Homogeneous(xb);
  const Eigen::Vector3d fa = F * a;
  const Eigen::Vector3d fb = F.transpose() * b;
  const double num = b.dot(fa);
  const double den = fa(0) * fa(0) + fa(1) * fa(1) + fb(0) * fb(0) + fb(1) * fb(1);
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num * num / den;
}

MotionHypothesis MakeHypothesis(const CalibrationResult& calibration) {
  MotionHypothesis h;
  h.calibration = calibration;
  const std::array<Camera, 3> cams = calibration.MetricCameras();
  for (std::size_t k = 0; k < kScoredPairs.size(); ++k) {
    h.F[k] = PairFundamental(cams[kScoredPairs[k][0]], cams[kScoredPairs[k][1]]);
  }
  return h;
}

double PointScore(const MotionHypothesis& h, const Observations& window, int point,
                  double threshold) {
  double s = 0.0;
  for (std::size_t k = 0; k < kScoredPairs.size(); ++k) {
    const Eigen::Vector2d& xa = window[kScoredPairs[k][0]][point];
    const Eigen::Vector2d& xb = window[kScoredPairs[k][1]][point];
    s += std::min(SampsonError(h.F[k], xa, xb), threshold);
  }
  return s;
}

double SampsonScore(const MotionHypothesis& h, const Observations& window,
                    std::span<const int> points, double threshold) {
  double s = 0.0;
  if (points.empty()) {
    const int n = static_cast<int>(window.front().size());
    for (int j = 0; j < n; ++j) s += PointScore(h, window, j, threshold);
  } else {
    for (int j : points) s += PointScore(h, window, j, threshold);
  }
  return s;
}

int PreemptionSurvivors(int n_hypotheses, int block_size, int scored) {
  const int halvings = scored / block_size;
  if (halvings >= 31) return 1;
  return std::max(1, n_hypotheses >> halvings);
}

std::vector<MotionHypothesis> GenerateHypotheses(const Observations& window,
                                                 const RansacConfig& cfg, int* attempts) {
  if (window.size() != 3) throw std::invalid_argument("a window has exactly three views");
  const int n = static_cast<int>(window.front().size());
  if (n < 6) throw std::invalid_argument("a window needs at least six points");

  std::mt19937_64 rng = TrialStream(cfg.seed, 0);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::vector<MotionHypothesis> out;
  const long max_attempts = static_cast<long>(cfg.max_attempts_factor) * cfg.n_hypotheses;
  int tried = 0;
  while (static_cast<int>(out.size()) < cfg.n_hypotheses && tried < max_attempts) {
    ++tried;
    // Partial Fisher-Yates: the first six entries form the sample.
    for (int k = 0; k < 6; ++k) {
      std::uniform_int_distribution<int> pick(k, n - 1);
      std::swap(order[k], order[pick(rng)]);
    }
    SixViewCorrespondences corr;
    std::array<int, 6> sample{};
    for (int k = 0; k < 6; ++k) sample[k] = order[k];
    for (int v = 0; v < 3; ++v) {
      for (int k = 0; k < 6; ++k) corr.views[v][k] = Homogeneous(window[v][sample[k]]);
    }
    const AutocalibOutput sol = Autocalibrate(corr);
    for (const CalibrationResult& r : sol.results) {
      if (static_cast<int>(out.size()) >= cfg.n_hypotheses) break;
      try {
        MotionHypothesis h = MakeHypothesis(r);
        h.sample = sample;
        h.index = static_cast<int>(out.size());
        out.push_back(std::move(h));
      } catch (const SolverError&) {
        // a root with coincident centers cannot be scored
      }
    }
  }
  if (attempts) *attempts = tried;
  return out;
}

RansacResult PreemptiveSelect(std::vector<MotionHypothesis> hypotheses,
                              const Observations& window, const RansacConfig& cfg) {
  if (hypotheses.empty()) throw SolverError(ErrorCode::kNoHypothesis, "no hypothesis to select");
  if (cfg.block_size < 1) throw std::invalid_argument("block size must be positive");
  const int n_hyp = static_cast<int>(hypotheses.size());
  const int n_obs = static_cast<int>(window.front().size());

  std::mt19937_64 rng = TrialStream(cfg.seed, 1);
  std::vector<int> order(n_obs);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> score(n_hyp, 0.0);
  std::vector<int> alive(n_hyp);
  std::iota(alive.begin(), alive.end(), 0);
  auto better = [&](int a, int b) { return score[a] < score[b] || (score[a] == score[b] && a < b); };

  RansacResult res;
  res.hypotheses = n_hyp;
  for (int i = 0; i < n_obs && alive.size() > 1; ++i) {
    for (int h : alive) score[h] += PointScore(hypotheses[h], window, order[i], cfg.sampson_threshold);
    if ((i + 1) % cfg.block_size == 0) {
      const int keep = PreemptionSurvivors(n_hyp, cfg.block_size, i + 1);
      if (static_cast<int>(alive.size()) > keep) {
        std::sort(alive.begin(), alive.end(), better);
        alive.resize(keep);
        std::sort(alive.begin(), alive.end());
      }
      res.survivors.push_back(static_cast<int>(alive.size()));
    }
  }
  const int best = *std::min_element(alive.begin(), alive.end(), better);
  res.best = std::move(hypotheses[best]);
  res.best_score = score[best];
  return res;
}

RansacResult PreemptiveRansac(const Observations& window, const RansacConfig& cfg) {
  if (cfg.n_hypotheses < 1) throw std::invalid_argument("hypothesis budget must be positive");
  int attempts = 0;
  std::vector<MotionHypothesis> hyps = GenerateHypotheses(window, cfg, &attempts);
  if (hyps.empty()) {
    throw SolverError(ErrorCode::kNoHypothesis, "every minimal sample failed");
  }
  RansacResult res = PreemptiveSelect(std::move(hyps), window, cfg);
  res.attempts = attempts;
  return res;
}

TrackResult TrackSequence(const Observations& obs, const RansacConfig& cfg) {
  const int n_views = static_cast<int>(obs.size());
  if (n_views < 3) throw std::invalid_argument("a sequence needs at least three views");
  const int n_windows = n_views - 2;

  TrackResult out;
  out.windows.resize(n_windows);
  ParallelFor(static_cast<std::size_t>(n_windows), [&](std::size_t w) {
    WindowResult& wr = out.windows[w];
    wr.first_view = static_cast<int>(w);
    const Observations window = {obs[w], obs[w + 1], obs[w + 2]};
    RansacConfig wcfg = cfg;
    wcfg.seed = WindowSeed(cfg.seed, static_cast<int>(w));
    try {
      const RansacResult r = PreemptiveRansac(window, wcfg);
      wr.calibration = r.best.calibration;
      wr.score = r.best_score;
      wr.hypotheses = r.hypotheses;
    } catch (const SolverError& e) {
      wr.error = e.code();
    }
  });

  for (const WindowResult& wr : out.windows) {
    if (!wr.calibration) continue;
    out.mean_K += wr.calibration->K;
    ++out.accepted;
  }
  if (out.accepted > 0) out.mean_K /= out.accepted;

  // Chain poses: x_cam = R X + t in the frame of camera 0.
  std::vector<std::optional<std::pair<Eigen::Matrix3d, Eigen::Vector3d>>> pose(n_views);
  pose[0] = std::make_pair(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
  auto center = [&](int k) { return Eigen::Vector3d(-pose[k]->first.transpose() * pose[k]->second); };
  double scale = 1.0;
  for (int w = 0; w < n_windows; ++w) {
    const WindowResult& wr = out.windows[w];
    if (!wr.calibration || !pose[w]) continue;
    const CalibrationResult& c = *wr.calibration;
    // The window's first baseline has length |t2|; match it to the chain
    // when both of its cameras are already placed.
    if (pose[w + 1] && c.t2.norm() > 0.0) {
      scale = (center(w + 1) - center(w)).norm() / c.t2.norm();
    }
    const auto& [rw, tw] = *pose[w];
    if (!pose[w + 1]) pose[w + 1] = std::make_pair(Eigen::Matrix3d(c.R2 * rw), Eigen::Vector3d(c.R2 * tw + scale * c.t2));
    if (!pose[w + 2]) pose[w + 2] = std::make_pair(Eigen::Matrix3d(c.R3 * rw), Eigen::Vector3d(c.R3 * tw + scale * c.t3));
  }
  out.centers.resize(n_views);
  for (int k = 0; k < n_views; ++k) {
    if (pose[k]) out.centers[k] = center(k);
  }
  return out;
}

Eigen::Matrix4d SimilarityAlignment(const std::vector<std::optional<Eigen::Vector3d>>& estimated,
                                    const std::vector<Eigen::Vector3d>& reference) {
  std::vector<int> idx;
  for (std::size_t k = 0; k < estimated.size() && k < reference.size(); ++k) {
    if (estimated[k]) idx.push_back(static_cast<int>(k));
  }
  if (idx.size() < 3) throw std::invalid_argument("alignment needs at least three centers");
  Eigen::Matrix3Xd src(3, idx.size()), dst(3, idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    src.col(i) = *estimated[idx[i]];
    dst.col(i) = reference[idx[i]];
  }
  return Eigen::umeyama(src, dst, true);
}

AlignmentErrors AlignedCenterErrors(const std::vector<std::optional<Eigen::Vector3d>>& estimated,
                                    const std::vector<Eigen::Vector3d>& reference) {
  const Eigen::Matrix4d t = SimilarityAlignment(estimated, reference);
  AlignmentErrors e;
  double sum = 0.0;
  for (std::size_t k = 0; k < estimated.size() && k < reference.size(); ++k) {
    if (!estimated[k]) continue;
    const Eigen::Vector3d p = t.topLeftCorner<3, 3>() * *estimated[k] + t.topRightCorner<3, 1>();
    const double d = (p - reference[k]).norm();
    sum += d * d;
    e.max = std::max(e.max, d);
    ++e.count;
  }
  e.rms = std::sqrt(sum / e.count);
  return e;
}

}  // namespace sixcal
