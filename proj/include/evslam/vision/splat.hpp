#pragma once

#include <Eigen/Core>

#include <span>

#include "evslam/core/event.hpp"
#include "evslam/vision/image.hpp"

namespace evslam {

enum class PolarityMode { kUnsigned, kSigned };

struct SplatConfig {
  double sigma = 1.0;                                  // Gaussian kernel sigma in pixels
  PolarityMode polarity = PolarityMode::kUnsigned;
  double truncation_radius_sigmas = 3.0;
};

/// Accumulates events into a float histogram with a sampled Gaussian kernel.
/// Each event deposits unit (or polarity-signed) mass; the kernel is
/// renormalized over its truncated footprint so mass is exact per event.
ImageF splatEvents(std::span<const Event> events, const SplatConfig& cfg, int width, int height);

/// Splat with externally supplied (warped) coordinates, one per event.
ImageF splatAt(std::span<const Event> events, std::span<const Eigen::Vector2f> coords,
               const SplatConfig& cfg, int width, int height);

/// Min-max normalization over the nonzero support to [0, 255] for FAST/KLT
/// consumption. Zero pixels stay zero.
ImageF normalizeForTracking(const ImageF& img);

}  // namespace evslam
