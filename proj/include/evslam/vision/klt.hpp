#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "evslam/vision/pyramid.hpp"

namespace evslam {

struct KltConfig {
  int levels = 2;
  int window = 23;                     // odd block size in pixels
  double max_bidirectional_error = 1.0;
  int max_iterations = 30;
  double epsilon = 0.01;               // step-norm convergence, pixels
  double min_eig = 1e-3;               // reject flat windows (per-pixel eigenvalue)
};

struct KltResult {
  Eigen::Vector2f pos = Eigen::Vector2f::Zero();
  bool ok = false;
};

/// Pyramidal Lucas-Kanade with a forward-backward consistency check.
/// `guesses` (optional, same length as points) seeds the coarse level.
std::vector<KltResult> kltTrack(const Pyramid& prev, const Pyramid& next,
                                std::span<const Eigen::Vector2f> points, const KltConfig& cfg,
                                std::span<const Eigen::Vector2f> guesses = {});

}  // namespace evslam
