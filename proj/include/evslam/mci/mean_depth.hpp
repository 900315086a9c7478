#pragma once

#include <optional>
#include <span>

#include "evslam/core/camera.hpp"
#include "evslam/core/lie.hpp"
#include "evslam/mci/motion_fit.hpp"

namespace evslam {

enum class MeanDepthFailure { kNone, kTooFewMatches, kUnobservable, kFlatResidual };

struct MeanDepthConfig {
  double min_depth = 0.05;
  double max_depth = 1000.0;
  double min_baseline = 1e-4;      // translation below this is pure rotation
  int coarse_samples = 60;
  double curvature_floor = 1e-8;   // second-derivative reliability check
};

/// Shared scene depth that best explains the matches under a fixed relative
/// transform T_cur_ref: 1-D minimization of the reprojection cost over a
/// common inverse depth.
std::optional<double> estimateMeanDepth(std::span<const TrackedPair> matches,
                                        const Pose& T_cur_ref, const CameraModel& cam,
                                        const MeanDepthConfig& cfg = {},
                                        MeanDepthFailure* why = nullptr);

}  // namespace evslam
