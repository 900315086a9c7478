#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "evslam/core/camera.hpp"
#include "evslam/core/lie.hpp"

namespace evslam {

struct PoseObservation {
  Eigen::Vector3d point_w = Eigen::Vector3d::Zero();
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  double weight = 1.0;  // information weight (Omega = weight * I)
};

struct PoseOptimizerConfig {
  double huber_delta_px = 2.4;
  int max_iterations = 20;
  double step_tolerance = 1e-8;
  double cost_tolerance = 1e-10;
  double chi2_gate = 5.99;  // 2-DOF 95% at 1 px sigma
};

struct PoseOptimizerResult {
  Pose T_cw;                      // refined world-to-camera transform
  std::vector<bool> inlier;
  int inlier_count = 0;
  double final_cost = 0.0;
  double median_reproj_px = 0.0;  // over inliers
};

/// Motion-only Levenberg-Marquardt on SE(3) with a left-multiplied increment
/// and Huber weighting. Camera must be distortion-free (rectified frame).
/// Throws std::invalid_argument with fewer than 4 observations.
PoseOptimizerResult optimizePose(const Pose& T_cw_init, std::span<const PoseObservation> obs,
                                 const CameraModel& cam, const PoseOptimizerConfig& cfg = {});

}  // namespace evslam
