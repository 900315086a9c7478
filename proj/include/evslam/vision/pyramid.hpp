#pragma once

#include <vector>

#include "evslam/vision/image.hpp"

namespace evslam {

struct Pyramid {
  std::vector<ImageF> levels;
  const ImageF& base() const { return levels.front(); }
  int count() const { return static_cast<int>(levels.size()); }
};

/// Level 0 is the input; each next level is a 5-tap binomial low-pass
/// subsampled by two (floor dimensions). Throws when a level would become
/// smaller than min_size.
Pyramid buildPyramid(const ImageF& img, int levels, int min_size = 8);

}  // namespace evslam
