#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

#include "evslam/core/camera.hpp"
#include "evslam/core/event.hpp"
#include "evslam/core/lie.hpp"

namespace evslam {

/// Planar warp of one event to the reference timestamp under a constant-rate
/// 2D motion model. Coordinates pass through the normalized image plane.
Eigen::Vector2f warp2d(const Event& e, const Sim2Twist& psi, double t_ref, const CameraModel& cam);

/// SE(3) warp: lift the event to the given z-depth, transport it with
/// Exp(psi * dt) and reproject. nullopt when the point lands behind the
/// camera. `depth_out`, when set, receives the transported point depth
/// (useful for chaining warps consistently).
std::optional<Eigen::Vector2f> warp3d(const Event& e, const Se3Twist& psi, double depth,
                                      const CameraModel& cam, double t_ref,
                                      double* depth_out = nullptr);

std::vector<Eigen::Vector2f> warp2dWindow(std::span<const Event> events, const Sim2Twist& psi,
                                          double t_ref, const CameraModel& cam);

/// Warped coordinates plus a keep-mask (dropped events land behind camera).
std::pair<std::vector<Eigen::Vector2f>, std::vector<bool>> warp3dWindow(
    std::span<const Event> events, const Se3Twist& psi, double depth, const CameraModel& cam,
    double t_ref);

}  // namespace evslam
