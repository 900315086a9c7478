#pragma once

#include <cstdint>
#include <vector>

namespace evslam {

/// One DVS sample: timestamp (s), pixel location, polarity in {-1, +1}.
/// Coordinates are float so they can hold rectified sub-pixel positions.
struct Event {
  double t = 0.0;
  float x = 0.0f;
  float y = 0.0f;
  std::int8_t p = 1;
};

using EventWindow = std::vector<Event>;

}  // namespace evslam
