#pragma once

#include <vector>

#include "evslam/core/frame.hpp"
#include "evslam/vision/image.hpp"

namespace evslam {

struct FastConfig {
  float threshold = 10.0f;   // intensity step for the segment test
  int grid_cols = 8;
  int grid_rows = 6;
  int cell_capacity = 5;     // keep this many top-response corners per cell
  bool nonmax_suppression = true;
};

/// FAST-9 segment test on the 16-pixel Bresenham circle. Response is the
/// sum of absolute center differences over the passing arc. Corners closer
/// than 3 px to the border are excluded; a bucketing grid keeps detections
/// spread across the image.
std::vector<Keypoint> detectFast(const ImageF& img, const FastConfig& cfg);

/// Segment test + response for one pixel (zero when not a corner).
float fastScoreAt(const ImageF& img, int x, int y, float threshold);

}  // namespace evslam
