#pragma once

#include <Eigen/Core>

#include <vector>

#include "evslam/core/camera.hpp"
#include "evslam/core/lie.hpp"

namespace evslam {

struct BaObservation {
  int kf = 0;      // index into the keyframe pose array
  int point = 0;   // index into the point array
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  double weight = 1.0;
};

struct BundleAdjusterConfig {
  double huber_delta_px = 2.4;
  int max_iterations = 20;
  double step_tolerance = 1e-8;
  double cost_tolerance = 1e-10;
  double chi2_gate = 5.99;
};

struct BaResult {
  std::vector<Pose> poses;            // world-to-camera, refined
  std::vector<Eigen::Vector3d> points;
  std::vector<bool> obs_inlier;       // chi2 gate evaluated at the solution
  std::vector<double> step_costs;     // cost after each accepted step
  double initial_cost = 0.0;
  double final_cost = 0.0;
};

/// Joint reprojection bundle adjustment with Schur elimination of the point
/// blocks. `fixed_kf[i]` pins keyframe i (gauge anchors). Points observed by
/// fewer than two distinct keyframes are held constant. Cost never increases
/// across accepted steps.
BaResult localBundleAdjustment(const std::vector<Pose>& T_cw, const std::vector<bool>& fixed_kf,
                               const std::vector<Eigen::Vector3d>& points,
                               const std::vector<BaObservation>& observations,
                               const CameraModel& cam, const BundleAdjusterConfig& cfg = {});

/// Reprojection residual and analytic Jacobians for one observation; used by
/// the optimizer and exposed for finite-difference verification.
void reprojectionJacobians(const Pose& T_cw, const Eigen::Vector3d& point_w, const CameraModel& cam,
                           Eigen::Vector2d* residual_from, const Eigen::Vector2d& pixel,
                           Eigen::Matrix<double, 2, 6>* J_pose, Eigen::Matrix<double, 2, 3>* J_point);

}  // namespace evslam
