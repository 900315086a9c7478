#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evslam/core/camera.hpp"
#include "evslam/core/lie.hpp"

namespace evslam {

struct Match2d {
  Eigen::Vector2d ref = Eigen::Vector2d::Zero();  // pixel in the reference frame
  Eigen::Vector2d cur = Eigen::Vector2d::Zero();  // pixel in the current frame
};

enum class TwoViewModel { kHomography, kFundamental };

enum class TwoViewFailure {
  kNone,
  kInsufficientMatches,
  kAmbiguousModel,
  kCheirality,
  kLowParallax,
};

struct TwoViewResult {
  Pose T_cur_ref;                       // x_cur = R * x_ref + t, ||t|| = 1
  std::vector<bool> inlier;
  std::vector<Eigen::Vector3d> points;  // triangulated, reference-camera frame
  std::vector<int> point_match;         // match index per triangulated point
  TwoViewModel model = TwoViewModel::kFundamental;
  double parallax_deg = 0.0;            // median over triangulated points
};

struct TwoViewConfig {
  int ransac_iterations = 200;
  double inlier_threshold_px = 1.5;
  double strict_score_ratio = 1.4;   // winning model must beat the other by this
  double relaxed_score_ratio = 1.0;
  double strict_min_parallax_deg = 0.5;
  double relaxed_min_parallax_deg = 0.2;
  double ambiguity_ratio = 0.9;      // strict mode: runner-up cheirality bound
  int min_triangulated = 8;
};

/// Relative pose from matched pixels: RANSAC homography vs fundamental,
/// winner decomposition, cheirality and parallax gates. `relaxed` lowers the
/// model-selection margin and parallax bar for small-baseline tiny frames.
/// The seed pins the RANSAC sampling for reproducibility.
std::optional<TwoViewResult> twoViewInit(std::span<const Match2d> matches, const CameraModel& cam,
                                         bool relaxed, std::uint64_t seed,
                                         const TwoViewConfig& cfg = {},
                                         TwoViewFailure* why = nullptr);

}  // namespace evslam
