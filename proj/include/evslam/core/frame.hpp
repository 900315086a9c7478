#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "evslam/core/lie.hpp"
#include "evslam/vision/image.hpp"

namespace evslam {

enum class FrameKind { kTiny, kMci, kKeyframe };

struct Keypoint {
  Eigen::Vector2f px = Eigen::Vector2f::Zero();
  float response = 0.0f;
  int track_id = -1;
};

/// Image plus bookkeeping: timestamp, keypoints, optional pose estimate.
struct Frame {
  int id = -1;
  double t_ref = 0.0;
  FrameKind kind = FrameKind::kTiny;
  ImageF image;
  std::vector<Keypoint> keypoints;
  std::optional<Pose> pose;  // required for keyframes
};

struct TrajectorySample {
  double t = 0.0;
  Pose pose;
};

}  // namespace evslam
