#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evslam/core/event.hpp"

namespace evslam {

enum class CameraKind { kPinholeRadTan, kKannalaBrandt };

/// Intrinsics + distortion. Pinhole uses k1,k2,p1,p2[,k3] radial-tangential
/// coefficients; Kannala-Brandt uses the k1..k4 equidistant polynomial.
class CameraModel {
 public:
  CameraModel() = default;
  CameraModel(CameraKind kind, int width, int height, double fx, double fy, double cx, double cy,
              std::vector<double> distortion = {});

  CameraKind kind() const { return kind_; }
  int width() const { return width_; }
  int height() const { return height_; }
  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }
  const std::vector<double>& distortion() const { return dist_; }
  bool hasDistortion() const;

  /// Camera-frame point -> pixel. nullopt when the point cannot be imaged
  /// (pinhole with z <= 0, Kannala-Brandt with zero norm).
  std::optional<Eigen::Vector2d> project(const Eigen::Vector3d& P) const;

  /// Pixel -> camera-frame point at the given z-depth. Throws
  /// std::domain_error when distortion inversion fails to converge or the
  /// ray points away from the image plane.
  Eigen::Vector3d unproject(const Eigen::Vector2d& px, double depth) const;

  /// Pixel -> ideal (undistorted) normalized image coordinates.
  Eigen::Vector2d undistortNormalized(const Eigen::Vector2d& px) const;

  /// Normalized coordinates -> pixel through distortion + intrinsics.
  Eigen::Vector2d distortToPixel(const Eigen::Vector2d& xn) const;

  /// Same intrinsics with distortion removed; the model rectified events
  /// live in.
  CameraModel rectified() const;

  bool inBounds(double x, double y) const {
    return x >= 0.0 && x < static_cast<double>(width_) && y >= 0.0 && y < static_cast<double>(height_);
  }

 private:
  CameraKind kind_ = CameraKind::kPinholeRadTan;
  int width_ = 0, height_ = 0;
  double fx_ = 1.0, fy_ = 1.0, cx_ = 0.0, cy_ = 0.0;
  std::vector<double> dist_;
};

/// Per-pixel undistortion lookup table. Events at integer sensor pixels map
/// to continuous rectified coordinates; targets outside the image are marked
/// invalid and the events dropped.
class EventRectifier {
 public:
  explicit EventRectifier(const CameraModel& cam);

  /// Rectify a window in place order- and timestamp-preserving; out-of-bounds
  /// results are removed.
  EventWindow rectify(std::span<const Event> events) const;

  const CameraModel& rectifiedCamera() const { return rectified_; }
  std::optional<Eigen::Vector2f> lookup(int x, int y) const;

 private:
  CameraModel rectified_;
  int width_ = 0, height_ = 0;
  std::vector<Eigen::Vector2f> table_;
  std::vector<std::uint8_t> valid_;
};

}  // namespace evslam
