#include "evslam/mci/warp.hpp"

#include <cmath>

namespace evslam {

Eigen::Vector2f warp2d(const Event& e, const Sim2Twist& psi, double t_ref, const CameraModel& cam) {
  const double dt = std::abs(t_ref - e.t);
  if (dt == 0.0 || psi.isZero()) return {e.x, e.y};
  const Sim2 T = sim2Exp(psi, dt);
  const Eigen::Vector2d xn((e.x - cam.cx()) / cam.fx(), (e.y - cam.cy()) / cam.fy());
  const Eigen::Vector2d wn = T * xn;
  return {static_cast<float>(cam.fx() * wn.x() + cam.cx()),
          static_cast<float>(cam.fy() * wn.y() + cam.cy())};
}

std::optional<Eigen::Vector2f> warp3d(const Event& e, const Se3Twist& psi, double depth,
                                      const CameraModel& cam, double t_ref, double* depth_out) {
  const double dt = std::abs(t_ref - e.t);
  const Eigen::Vector2d xn((e.x - cam.cx()) / cam.fx(), (e.y - cam.cy()) / cam.fy());
  const Eigen::Vector3d P(xn.x() * depth, xn.y() * depth, depth);
  const Eigen::Vector3d Pr = se3Exp(psi, dt) * P;
  if (Pr.z() <= 1e-9) return std::nullopt;
  if (depth_out) *depth_out = Pr.z();
  return Eigen::Vector2f(static_cast<float>(cam.fx() * Pr.x() / Pr.z() + cam.cx()),
                         static_cast<float>(cam.fy() * Pr.y() / Pr.z() + cam.cy()));
}

std::vector<Eigen::Vector2f> warp2dWindow(std::span<const Event> events, const Sim2Twist& psi,
                                          double t_ref, const CameraModel& cam) {
  std::vector<Eigen::Vector2f> out;
  out.reserve(events.size());
  for (const Event& e : events) out.push_back(warp2d(e, psi, t_ref, cam));
  return out;
}

std::pair<std::vector<Eigen::Vector2f>, std::vector<bool>> warp3dWindow(
    std::span<const Event> events, const Se3Twist& psi, double depth, const CameraModel& cam,
    double t_ref) {
  std::vector<Eigen::Vector2f> coords(events.size(), Eigen::Vector2f::Zero());
  std::vector<bool> keep(events.size(), false);
  for (size_t i = 0; i < events.size(); ++i) {
    if (const auto w = warp3d(events[i], psi, depth, cam, t_ref)) {
      coords[i] = *w;
      keep[i] = true;
    }
  }
  return {std::move(coords), std::move(keep)};
}

}  // namespace evslam
