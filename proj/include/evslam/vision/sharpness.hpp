#pragma once

#include "evslam/vision/image.hpp"

namespace evslam {

/// Mean over complete non-overlapping patch tiles of the per-patch population
/// standard deviation. Partial border tiles are ignored. Throws when the
/// image holds no complete patch.
double localStdSharpness(const ImageF& img, int patch = 16);

}  // namespace evslam
