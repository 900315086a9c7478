#include "evslam/mci/mean_depth.hpp"

#include <cmath>
#include <vector>

namespace evslam {

std::optional<double> estimateMeanDepth(std::span<const TrackedPair> matches,
                                        const Pose& T_cur_ref, const CameraModel& cam,
                                        const MeanDepthConfig& cfg, MeanDepthFailure* why) {
  auto fail = [&](MeanDepthFailure f) -> std::optional<double> {
    if (why) *why = f;
    return std::nullopt;
  };
  if (why) *why = MeanDepthFailure::kNone;
  if (matches.size() < 5) return fail(MeanDepthFailure::kTooFewMatches);
  if (T_cur_ref.translation().norm() <= cfg.min_baseline)
    return fail(MeanDepthFailure::kUnobservable);

  std::vector<Eigen::Vector3d> rays;
  std::vector<Eigen::Vector2d> targets;
  rays.reserve(matches.size());
  targets.reserve(matches.size());
  for (const auto& mch : matches) {
    const Eigen::Vector2d a((mch.ref.x() - cam.cx()) / cam.fx(), (mch.ref.y() - cam.cy()) / cam.fy());
    rays.emplace_back(a.x(), a.y(), 1.0);
    targets.emplace_back(mch.cur.x(), mch.cur.y());
  }

  auto costAt = [&](double depth) {
    double cost = 0.0;
    for (size_t i = 0; i < rays.size(); ++i) {
      const Eigen::Vector3d P = T_cur_ref * (rays[i] * depth);
      if (P.z() <= 1e-9) {
        cost += 1e9;
        continue;
      }
      const Eigen::Vector2d px(cam.fx() * P.x() / P.z() + cam.cx(),
                               cam.fy() * P.y() / P.z() + cam.cy());
      cost += (px - targets[i]).squaredNorm();
    }
    return cost;
  };

  // coarse log-spaced bracket, then golden-section refinement
  const double lo = std::log(cfg.min_depth), hi = std::log(cfg.max_depth);
  double best_u = lo, best_cost = costAt(std::exp(lo));
  for (int i = 1; i < cfg.coarse_samples; ++i) {
    const double u = lo + (hi - lo) * i / (cfg.coarse_samples - 1.0);
    const double c = costAt(std::exp(u));
    if (c < best_cost) {
      best_cost = c;
      best_u = u;
    }
  }
  const double du = (hi - lo) / (cfg.coarse_samples - 1.0);
  double a = std::max(lo, best_u - du), b = std::min(hi, best_u + du);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = costAt(std::exp(x1)), f2 = costAt(std::exp(x2));
  for (int it = 0; it < 60 && b - a > 1e-10; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = costAt(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = costAt(std::exp(x2));
    }
  }
  const double u = 0.5 * (a + b);
  const double depth = std::exp(u);
  const double f0 = costAt(depth);

  // reliability: the cost must actually curve around the minimum
  const double h = std::max(1e-4, 0.01 * std::abs(u));
  const double fm = costAt(std::exp(u - h)), fp = costAt(std::exp(u + h));
  const double curvature = (fp - 2.0 * f0 + fm) / (h * h);
  const double scale = std::max(1.0, f0);
  if (curvature < cfg.curvature_floor * scale) return fail(MeanDepthFailure::kFlatResidual);

  return depth;
}

}  // namespace evslam
