#pragma once

#include <cassert>
#include <vector>

namespace evslam {

/// Row-major float intensity buffer.
struct ImageF {
  int w = 0;
  int h = 0;
  std::vector<float> data;

  ImageF() = default;
  ImageF(int width, int height, float fill = 0.0f)
      : w(width), h(height), data(static_cast<size_t>(width) * height, fill) {}

  float& at(int x, int y) { return data[static_cast<size_t>(y) * w + x]; }
  float at(int x, int y) const { return data[static_cast<size_t>(y) * w + x]; }
  bool empty() const { return data.empty(); }

  bool contains(double x, double y) const { return x >= 0.0 && x < w && y >= 0.0 && y < h; }

  /// Bilinear sample; caller keeps (x, y) inside [0, w-1] x [0, h-1].
  float sample(double x, double y) const {
    int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
    if (x0 >= w - 1) x0 = w - 2;
    if (y0 >= h - 1) y0 = h - 2;
    if (x0 < 0) x0 = 0;
    if (y0 < 0) y0 = 0;
    const double ax = x - x0, ay = y - y0;
    const float v00 = at(x0, y0), v10 = at(x0 + 1, y0);
    const float v01 = at(x0, y0 + 1), v11 = at(x0 + 1, y0 + 1);
    return static_cast<float>((1.0 - ay) * ((1.0 - ax) * v00 + ax * v10) +
                              ay * ((1.0 - ax) * v01 + ax * v11));
  }
};

}  // namespace evslam
