#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "evslam/core/camera.hpp"
#include "evslam/core/event.hpp"
#include "evslam/core/lie.hpp"
#include "evslam/mci/motion_fit.hpp"
#include "evslam/sfm/two_view.hpp"
#include "evslam/vision/splat.hpp"

namespace evslam {

struct TwoViewPrior {
  TwoViewResult result;
  double median_depth = 0.0;  // of the triangulated points, reference frame
};

struct MotionPriors {
  std::optional<std::pair<Planar2dTag, Sim2Twist>> model_2d;  // last fitted planar motion
  std::optional<TwoViewPrior> two_view;
  std::optional<Pose> pose_prior;  // relative transform predicted over the track span
};

/// Event batch handed from the window selector to MCI reconstruction,
/// together with the feature tracks measured across its tiny frames.
struct ReconstructionWindow {
  EventWindow events;              // time-ordered, rectified
  double t_ref = 0.0;              // last event timestamp: warp target
  std::vector<TrackedPair> tracks; // reference -> last tiny frame matches
  double track_span = 0.0;         // seconds between those two tiny frames
  MotionPriors priors;
  bool forced = false;             // low-rate forced dispatch
};

enum class Hypothesis { kH1, kH2, kH3, kH4 };

struct MciCandidate {
  ImageF image;  // normalized to [0, 255]
  Hypothesis hypothesis = Hypothesis::kH4;
  double score = 0.0;
  MotionPriors refined;  // priors updated by this hypothesis
};

struct HypothesisConfig {
  bool enable_h1 = true;
  bool enable_h2 = true;
  bool enable_h3 = true;
  bool enable_h4 = true;
  bool h1_refine_ba = true;
  int h1_ba_iterations = 10;
  Planar2dTag h2_tag = Planar2dTag::kSim2;
  SplatConfig splat;
  int sharpness_patch = 16;
  bool concurrent = false;  // evaluate hypotheses in parallel threads
};

/// Algorithm-2 candidate generation: one motion-compensated image per
/// applicable hypothesis, each scored by average local standard deviation.
/// H4 (plain histogram) is always produced, so the result is never empty.
std::vector<MciCandidate> reconstructHypotheses(const ReconstructionWindow& window,
                                                const HypothesisConfig& cfg,
                                                const CameraModel& cam);

/// Highest score wins; exact ties resolve by informedness H1 > H3 > H2 > H4.
const MciCandidate& selectBest(const std::vector<MciCandidate>& candidates);

}  // namespace evslam
