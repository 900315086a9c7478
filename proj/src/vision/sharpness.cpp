#include "evslam/vision/sharpness.hpp"

#include <cmath>
#include <stdexcept>

namespace evslam {

double localStdSharpness(const ImageF& img, int patch) {
  if (patch < 2) throw std::invalid_argument("sharpness: patch must be >= 2");
  const int tx = img.w / patch, ty = img.h / patch;
  if (tx < 1 || ty < 1) throw std::invalid_argument("sharpness: image smaller than one patch");

  const double n = static_cast<double>(patch) * patch;
  double total = 0.0;
  for (int py = 0; py < ty; ++py) {
    for (int px = 0; px < tx; ++px) {
      double sum = 0.0, sum2 = 0.0;
      for (int y = py * patch; y < (py + 1) * patch; ++y) {
        for (int x = px * patch; x < (px + 1) * patch; ++x) {
          const double v = img.at(x, y);
          sum += v;
          sum2 += v * v;
        }
      }
      const double mean = sum / n;
      total += std::sqrt(std::max(0.0, sum2 / n - mean * mean));
    }
  }
  return total / (static_cast<double>(tx) * ty);
}

}  // namespace evslam
