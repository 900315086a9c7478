#include "evslam/vision/pyramid.hpp"

#include <algorithm>
#include <stdexcept>

namespace evslam {

namespace {

// 5-tap binomial [1 4 6 4 1]/16, clamped borders, separable.
ImageF lowpass(const ImageF& src) {
  static const float k[5] = {1.f / 16, 4.f / 16, 6.f / 16, 4.f / 16, 1.f / 16};
  ImageF tmp(src.w, src.h);
  for (int y = 0; y < src.h; ++y) {
    for (int x = 0; x < src.w; ++x) {
      float acc = 0.f;
      for (int i = -2; i <= 2; ++i) {
        const int xi = std::clamp(x + i, 0, src.w - 1);
        acc += k[i + 2] * src.at(xi, y);
      }
      tmp.at(x, y) = acc;
    }
  }
  ImageF out(src.w, src.h);
  for (int y = 0; y < src.h; ++y) {
    for (int x = 0; x < src.w; ++x) {
      float acc = 0.f;
      for (int i = -2; i <= 2; ++i) {
        const int yi = std::clamp(y + i, 0, src.h - 1);
        acc += k[i + 2] * tmp.at(x, yi);
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

}  // namespace

Pyramid buildPyramid(const ImageF& img, int levels, int min_size) {
  if (levels < 1) throw std::invalid_argument("pyramid: levels must be >= 1");
  if (img.w < min_size || img.h < min_size)
    throw std::invalid_argument("pyramid: image too small");
  Pyramid pyr;
  pyr.levels.push_back(img);
  for (int l = 1; l < levels; ++l) {
    const ImageF& prev = pyr.levels.back();
    const int w = prev.w / 2, h = prev.h / 2;
    if (w < min_size || h < min_size)
      throw std::invalid_argument("pyramid: image too small for requested levels");
    const ImageF smooth = lowpass(prev);
    ImageF next(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) next.at(x, y) = smooth.at(2 * x, 2 * y);
    pyr.levels.push_back(std::move(next));
  }
  return pyr;
}

}  // namespace evslam
