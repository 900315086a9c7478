#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

#include "evslam/core/camera.hpp"
#include "evslam/core/lie.hpp"

namespace evslam {

struct TrackedPair {
  Eigen::Vector2f ref = Eigen::Vector2f::Zero();
  Eigen::Vector2f cur = Eigen::Vector2f::Zero();
};

struct MotionFitConfig {
  double huber_delta_px = 2.0;
  double inlier_threshold_px = 3.0;
  int max_iterations = 50;
  double step_tolerance = 1e-10;
};

struct MotionFit {
  Sim2Twist twist;            // transform-per-second, ref -> cur direction
  Planar2dTag tag = Planar2dTag::kSim2;
  std::vector<bool> inlier;
  int inlier_count = 0;
  double final_cost = 0.0;
  std::vector<double> step_costs;
};

/// Fits a Sim(2) or SE(2) transform mapping reference features onto their
/// matches (Gauss-Newton, Huber) and converts it to a per-second twist over
/// the span dT. Feature coordinates are normalized by the intrinsics before
/// the fit; residuals are expressed in pixels. Returns nullopt when fewer
/// than 3 matches exist or the fit does not converge.
std::optional<MotionFit> fit2dMotion(std::span<const TrackedPair> tracks, double dT,
                                     Planar2dTag tag, const CameraModel& cam,
                                     const std::optional<Sim2Twist>& init = std::nullopt,
                                     const MotionFitConfig& cfg = {});

}  // namespace evslam
