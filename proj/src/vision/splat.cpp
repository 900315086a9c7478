#include "evslam/vision/splat.hpp"

#include <cmath>
#include <stdexcept>

namespace evslam {

namespace {

void splatOne(ImageF& img, double cx, double cy, double weight, double sigma, double radius) {
  const int x0 = static_cast<int>(std::ceil(cx - radius));
  const int x1 = static_cast<int>(std::floor(cx + radius));
  const int y0 = static_cast<int>(std::ceil(cy - radius));
  const int y1 = static_cast<int>(std::floor(cy + radius));
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);

  // Normalize over the truncated footprint so each event lands unit mass.
  double mass = 0.0;
  for (int y = y0; y <= y1; ++y) {
    const double dy = y - cy;
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - cx;
      mass += std::exp(-(dx * dx + dy * dy) * inv2s2);
    }
  }
  if (mass <= 0.0) return;
  const double scale = weight / mass;
  for (int y = std::max(y0, 0); y <= std::min(y1, img.h - 1); ++y) {
    const double dy = y - cy;
    for (int x = std::max(x0, 0); x <= std::min(x1, img.w - 1); ++x) {
      const double dx = x - cx;
      img.at(x, y) += static_cast<float>(scale * std::exp(-(dx * dx + dy * dy) * inv2s2));
    }
  }
}

}  // namespace

ImageF splatEvents(std::span<const Event> events, const SplatConfig& cfg, int width, int height) {
  if (cfg.sigma <= 0.0) throw std::invalid_argument("splat: sigma must be positive");
  ImageF img(width, height);
  const double radius = cfg.truncation_radius_sigmas * cfg.sigma;
  for (const Event& e : events) {
    const double w = cfg.polarity == PolarityMode::kSigned ? static_cast<double>(e.p) : 1.0;
    splatOne(img, e.x, e.y, w, cfg.sigma, radius);
  }
  return img;
}

ImageF splatAt(std::span<const Event> events, std::span<const Eigen::Vector2f> coords,
               const SplatConfig& cfg, int width, int height) {
  if (events.size() != coords.size()) throw std::invalid_argument("splat: size mismatch");
  if (cfg.sigma <= 0.0) throw std::invalid_argument("splat: sigma must be positive");
  ImageF img(width, height);
  const double radius = cfg.truncation_radius_sigmas * cfg.sigma;
  for (size_t i = 0; i < events.size(); ++i) {
    const double w = cfg.polarity == PolarityMode::kSigned ? static_cast<double>(events[i].p) : 1.0;
    splatOne(img, coords[i].x(), coords[i].y(), w, cfg.sigma, radius);
  }
  return img;
}

ImageF normalizeForTracking(const ImageF& img) {
  float lo = 0.0f, hi = 0.0f;
  bool any = false;
  for (float v : img.data) {
    if (v == 0.0f) continue;
    if (!any) {
      lo = hi = v;
      any = true;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  ImageF out(img.w, img.h);
  if (!any) return out;
  const float span = hi - lo;
  for (size_t i = 0; i < img.data.size(); ++i) {
    const float v = img.data[i];
    if (v == 0.0f) continue;
    out.data[i] = span > 0.0f ? (v - lo) / span * 255.0f : 255.0f;
  }
  return out;
}

}  // namespace evslam
