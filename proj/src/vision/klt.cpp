#include "evslam/vision/klt.hpp"

#include <cmath>
#include <stdexcept>

namespace evslam {

namespace {

struct PatchData {
  std::vector<float> val;   // template intensities
  std::vector<float> gx, gy;
  Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
  bool ok = false;
};

bool windowInside(const ImageF& img, const Eigen::Vector2d& center, int half) {
  // +/- 1 margin for gradients and bilinear taps
  return center.x() - half >= 1.0 && center.y() - half >= 1.0 &&
         center.x() + half < img.w - 2.0 && center.y() + half < img.h - 2.0;
}

PatchData buildPatch(const ImageF& img, const Eigen::Vector2d& center, int half, double min_eig) {
  PatchData p;
  const int n = 2 * half + 1;
  if (!windowInside(img, center, half)) return p;
  p.val.resize(static_cast<size_t>(n) * n);
  p.gx.resize(p.val.size());
  p.gy.resize(p.val.size());
  size_t idx = 0;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx, ++idx) {
      const double x = center.x() + dx, y = center.y() + dy;
      p.val[idx] = img.sample(x, y);
      const float ix = 0.5f * (img.sample(x + 1.0, y) - img.sample(x - 1.0, y));
      const float iy = 0.5f * (img.sample(x, y + 1.0) - img.sample(x, y - 1.0));
      p.gx[idx] = ix;
      p.gy[idx] = iy;
      p.G(0, 0) += ix * ix;
      p.G(0, 1) += ix * iy;
      p.G(1, 1) += iy * iy;
    }
  }
  p.G(1, 0) = p.G(0, 1);
  const double tr = p.G.trace(), det = p.G.determinant();
  const double min_lambda = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
  p.ok = min_lambda / p.val.size() > min_eig;
  return p;
}

// One-direction pyramidal track; returns false when the point leaves the
// image or every level is textureless.
bool trackOne(const Pyramid& prev, const Pyramid& next, const Eigen::Vector2d& start,
              Eigen::Vector2d& out, const KltConfig& cfg, const Eigen::Vector2d& seed_flow) {
  const int half = cfg.window / 2;
  const int top = std::min(cfg.levels, prev.count()) - 1;
  Eigen::Vector2d flow = seed_flow / (1 << top);
  for (int level = top; level >= 0; --level) {
    const double scale = 1.0 / (1 << level);
    const ImageF& a = prev.levels[level];
    const ImageF& b = next.levels[level];
    const Eigen::Vector2d pt = start * scale;
    const PatchData patch = buildPatch(a, pt, half, cfg.min_eig);
    if (!patch.ok) {
      if (level > 0) {
        flow *= 2.0;
        continue;
      }
      return false;  // flat or out-of-bounds template at full resolution
    }
    const Eigen::Matrix2d Ginv = patch.G.inverse();
    for (int it = 0; it < cfg.max_iterations; ++it) {
      const Eigen::Vector2d target = pt + flow;
      if (!windowInside(b, target, half)) return false;
      Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
      size_t idx = 0;
      for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx, ++idx) {
          const float dI = patch.val[idx] - b.sample(target.x() + dx, target.y() + dy);
          rhs.x() += dI * patch.gx[idx];
          rhs.y() += dI * patch.gy[idx];
        }
      }
      const Eigen::Vector2d step = Ginv * rhs;
      flow += step;
      if (step.norm() < cfg.epsilon) break;
    }
    if (level > 0) flow *= 2.0;
  }
  out = start + flow;
  return windowInside(next.base(), out, half);
}

}  // namespace

std::vector<KltResult> kltTrack(const Pyramid& prev, const Pyramid& next,
                                std::span<const Eigen::Vector2f> points, const KltConfig& cfg,
                                std::span<const Eigen::Vector2f> guesses) {
  if (cfg.window % 2 == 0 || cfg.window < 3) throw std::invalid_argument("klt: window must be odd");
  if (!guesses.empty() && guesses.size() != points.size())
    throw std::invalid_argument("klt: guess count mismatch");

  std::vector<KltResult> results(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector2d start = points[i].cast<double>();
    const Eigen::Vector2d seed = guesses.empty()
                                     ? Eigen::Vector2d::Zero()
                                     : Eigen::Vector2d((guesses[i] - points[i]).cast<double>());
    Eigen::Vector2d fwd;
    if (!trackOne(prev, next, start, fwd, cfg, seed)) continue;
    Eigen::Vector2d back;
    if (!trackOne(next, prev, fwd, back, cfg, start - fwd)) continue;
    if ((back - start).norm() > cfg.max_bidirectional_error) continue;
    results[i].pos = fwd.cast<float>();
    results[i].ok = true;
  }
  return results;
}

}  // namespace evslam
