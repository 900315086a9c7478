#pragma once

#include <Eigen/Core>

#include <optional>

#include "evslam/core/camera.hpp"
#include "evslam/core/lie.hpp"

namespace evslam {

struct TriangulationGates {
  double min_ray_angle_deg = 0.1;
  double max_reprojection_px = 2.0;
};

/// DLT triangulation from two views. Poses are world-from-camera. Returns
/// nullopt when rays are near-parallel, a depth is non-positive, or a
/// reprojection exceeds the gate.
std::optional<Eigen::Vector3d> triangulate(const Pose& T_wc_a, const Pose& T_wc_b,
                                           const Eigen::Vector2d& px_a, const Eigen::Vector2d& px_b,
                                           const CameraModel& cam,
                                           const TriangulationGates& gates = {});

/// Angle in degrees between the two observation rays of a world point.
double rayParallaxDeg(const Pose& T_wc_a, const Pose& T_wc_b, const Eigen::Vector3d& point);

}  // namespace evslam
