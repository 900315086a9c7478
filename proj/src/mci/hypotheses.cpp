#include "evslam/mci/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

#include "evslam/mci/mean_depth.hpp"
#include "evslam/mci/warp.hpp"
#include "evslam/sfm/bundle_adjustment.hpp"
#include "evslam/vision/sharpness.hpp"

namespace evslam {

namespace {

double scoreImage(const ImageF& img, int patch) {
  const int p = std::min({patch, img.w, img.h});
  return localStdSharpness(img, std::max(2, p));
}

MciCandidate makeCandidate(ImageF raw, Hypothesis h, MotionPriors refined,
                           const HypothesisConfig& cfg) {
  MciCandidate c;
  c.image = normalizeForTracking(raw);
  c.hypothesis = h;
  c.score = scoreImage(c.image, cfg.sharpness_patch);
  c.refined = std::move(refined);
  return c;
}

double medianDepthOf(const std::vector<Eigen::Vector3d>& points) {
  std::vector<double> z;
  z.reserve(points.size());
  for (const auto& p : points) z.push_back(p.z());
  std::sort(z.begin(), z.end());
  return z.empty() ? 0.0 : z[(z.size() - 1) / 2];
}

// H1: refine the two-view reconstruction with a small BA, then warp with the
// relative-pose rate and the (recomputed) median depth.
std::optional<MciCandidate> buildH1(const ReconstructionWindow& w, const HypothesisConfig& cfg,
                                    const CameraModel& cam) {
  if (!w.priors.two_view || w.track_span <= 0.0) return std::nullopt;
  TwoViewPrior prior = *w.priors.two_view;
  const auto& tv = prior.result;
  if (tv.points.empty()) return std::nullopt;

  Pose T_cur_ref = tv.T_cur_ref;
  std::vector<Eigen::Vector3d> points = tv.points;

  if (cfg.h1_refine_ba && points.size() >= 8) {
    std::vector<Pose> poses = {Pose::identity(), T_cur_ref};
    std::vector<bool> fixed = {true, false};
    std::vector<BaObservation> obs;
    obs.reserve(2 * points.size());
    for (size_t i = 0; i < points.size(); ++i) {
      const int midx = tv.point_match[i];
      if (midx < 0 || midx >= static_cast<int>(w.tracks.size())) continue;
      obs.push_back({0, static_cast<int>(i), w.tracks[midx].ref.cast<double>(), 1.0});
      obs.push_back({1, static_cast<int>(i), w.tracks[midx].cur.cast<double>(), 1.0});
    }
    if (obs.size() >= 16) {
      BundleAdjusterConfig bcfg;
      bcfg.max_iterations = cfg.h1_ba_iterations;
      const BaResult ba = localBundleAdjustment(poses, fixed, points, obs, cam, bcfg);
      T_cur_ref = ba.poses[1];
      points = ba.points;
      // keep the monocular gauge: renormalize the baseline to unit length
      const double norm = T_cur_ref.translation().norm();
      if (norm > 1e-9) {
        T_cur_ref = Pose(T_cur_ref.rotation(), T_cur_ref.translation() / norm);
        for (auto& p : points) p /= norm;
      }
    }
  }

  const double depth = medianDepthOf(points);
  if (depth <= 0.0) return std::nullopt;
  const Se3Twist psi = se3Log(T_cur_ref).scaled(1.0 / w.track_span);

  auto [coords, keep] = warp3dWindow(w.events, psi, depth, cam, w.t_ref);
  EventWindow kept;
  std::vector<Eigen::Vector2f> kept_coords;
  kept.reserve(w.events.size());
  kept_coords.reserve(w.events.size());
  for (size_t i = 0; i < w.events.size(); ++i) {
    if (!keep[i]) continue;
    kept.push_back(w.events[i]);
    kept_coords.push_back(coords[i]);
  }
  ImageF img = splatAt(kept, kept_coords, cfg.splat, cam.width(), cam.height());

  MotionPriors refined = w.priors;
  refined.two_view = TwoViewPrior{tv, depth};
  refined.two_view->result.T_cur_ref = T_cur_ref;
  refined.two_view->result.points = std::move(points);
  return makeCandidate(std::move(img), Hypothesis::kH1, std::move(refined), cfg);
}

std::optional<MciCandidate> buildH2(const ReconstructionWindow& w, const HypothesisConfig& cfg,
                                    const CameraModel& cam) {
  if (w.tracks.size() < 3 || w.track_span <= 0.0) return std::nullopt;
  std::optional<Sim2Twist> init;
  if (w.priors.model_2d && w.priors.model_2d->first == cfg.h2_tag)
    init = w.priors.model_2d->second;
  const auto fit = fit2dMotion(w.tracks, w.track_span, cfg.h2_tag, cam, init);
  if (!fit) return std::nullopt;

  const auto coords = warp2dWindow(w.events, fit->twist, w.t_ref, cam);
  ImageF img = splatAt(w.events, coords, cfg.splat, cam.width(), cam.height());
  MotionPriors refined = w.priors;
  refined.model_2d = std::make_pair(cfg.h2_tag, fit->twist);
  return makeCandidate(std::move(img), Hypothesis::kH2, std::move(refined), cfg);
}

std::optional<MciCandidate> buildH3(const ReconstructionWindow& w, const HypothesisConfig& cfg,
                                    const CameraModel& cam) {
  if (!w.priors.pose_prior || w.tracks.size() < 5 || w.track_span <= 0.0) return std::nullopt;
  const Pose& T = *w.priors.pose_prior;
  const auto depth = estimateMeanDepth(w.tracks, T, cam);
  if (!depth) return std::nullopt;
  const Se3Twist psi = se3Log(T).scaled(1.0 / w.track_span);

  auto [coords, keep] = warp3dWindow(w.events, psi, *depth, cam, w.t_ref);
  EventWindow kept;
  std::vector<Eigen::Vector2f> kept_coords;
  for (size_t i = 0; i < w.events.size(); ++i) {
    if (!keep[i]) continue;
    kept.push_back(w.events[i]);
    kept_coords.push_back(coords[i]);
  }
  ImageF img = splatAt(kept, kept_coords, cfg.splat, cam.width(), cam.height());
  return makeCandidate(std::move(img), Hypothesis::kH3, w.priors, cfg);
}

MciCandidate buildH4(const ReconstructionWindow& w, const HypothesisConfig& cfg,
                     const CameraModel& cam) {
  ImageF img = splatEvents(w.events, cfg.splat, cam.width(), cam.height());
  return makeCandidate(std::move(img), Hypothesis::kH4, w.priors, cfg);
}

}  // namespace

std::vector<MciCandidate> reconstructHypotheses(const ReconstructionWindow& window,
                                                const HypothesisConfig& cfg,
                                                const CameraModel& cam) {
  if (window.events.empty()) throw std::invalid_argument("reconstructHypotheses: empty window");

  std::vector<MciCandidate> out;
  if (cfg.concurrent) {
    auto f1 = cfg.enable_h1 ? std::async(std::launch::async, buildH1, std::cref(window),
                                         std::cref(cfg), std::cref(cam))
                            : std::future<std::optional<MciCandidate>>();
    auto f2 = cfg.enable_h2 ? std::async(std::launch::async, buildH2, std::cref(window),
                                         std::cref(cfg), std::cref(cam))
                            : std::future<std::optional<MciCandidate>>();
    auto f3 = cfg.enable_h3 ? std::async(std::launch::async, buildH3, std::cref(window),
                                         std::cref(cfg), std::cref(cam))
                            : std::future<std::optional<MciCandidate>>();
    MciCandidate h4 = buildH4(window, cfg, cam);
    // deterministic join order regardless of completion order
    if (f1.valid())
      if (auto c = f1.get()) out.push_back(std::move(*c));
    if (f3.valid())
      if (auto c = f3.get()) out.push_back(std::move(*c));
    if (f2.valid())
      if (auto c = f2.get()) out.push_back(std::move(*c));
    if (cfg.enable_h4 || out.empty()) out.push_back(std::move(h4));
  } else {
    if (cfg.enable_h1)
      if (auto c = buildH1(window, cfg, cam)) out.push_back(std::move(*c));
    if (cfg.enable_h3)
      if (auto c = buildH3(window, cfg, cam)) out.push_back(std::move(*c));
    if (cfg.enable_h2)
      if (auto c = buildH2(window, cfg, cam)) out.push_back(std::move(*c));
    if (cfg.enable_h4 || out.empty()) out.push_back(buildH4(window, cfg, cam));
  }
  return out;
}

const MciCandidate& selectBest(const std::vector<MciCandidate>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("selectBest: no candidates");
  auto priority = [](Hypothesis h) {
    switch (h) {
      case Hypothesis::kH1: return 0;
      case Hypothesis::kH3: return 1;
      case Hypothesis::kH2: return 2;
      case Hypothesis::kH4: return 3;
    }
    return 3;
  };
  const MciCandidate* best = &candidates.front();
  for (const auto& c : candidates) {
    if (c.score > best->score ||
        (c.score == best->score && priority(c.hypothesis) < priority(best->hypothesis))) {
      best = &c;
    }
  }
  return *best;
}

}  // namespace evslam
