#include "evslam/sfm/pose_optimizer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evslam {

namespace {

// Huber rho'(e) applied as IRLS weight on the squared error.
double huberWeight(double err_norm, double delta) {
  return err_norm <= delta ? 1.0 : delta / err_norm;
}

double huberCost(double err2, double delta) {
  const double e = std::sqrt(err2);
  if (e <= delta) return 0.5 * err2;
  return delta * (e - 0.5 * delta);
}

}  // namespace

PoseOptimizerResult optimizePose(const Pose& T_cw_init, std::span<const PoseObservation> obs,
                                 const CameraModel& cam, const PoseOptimizerConfig& cfg) {
  if (obs.size() < 4) throw std::invalid_argument("optimizePose: needs at least 4 observations");
  if (cam.hasDistortion())
    throw std::invalid_argument("optimizePose: expects a rectified (distortion-free) camera");

  const double fx = cam.fx(), fy = cam.fy();

  auto evalCost = [&](const Pose& T) {
    double cost = 0.0;
    for (const auto& o : obs) {
      const Eigen::Vector3d pc = T * o.point_w;
      if (pc.z() <= 1e-9) {
        cost += 1e9;  // behind-camera barrier
        continue;
      }
      const Eigen::Vector2d px(fx * pc.x() / pc.z() + cam.cx(), fy * pc.y() / pc.z() + cam.cy());
      cost += o.weight * huberCost((px - o.pixel).squaredNorm(), cfg.huber_delta_px);
    }
    return cost;
  };

  Pose T = T_cw_init;
  double cost = evalCost(T);
  double lambda = 1e-4;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    Eigen::Matrix<double, 6, 6> H = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
    for (const auto& o : obs) {
      const Eigen::Vector3d pc = T * o.point_w;
      if (pc.z() <= 1e-9) continue;
      const double iz = 1.0 / pc.z();
      const Eigen::Vector2d px(fx * pc.x() * iz + cam.cx(), fy * pc.y() * iz + cam.cy());
      const Eigen::Vector2d r = px - o.pixel;

      Eigen::Matrix<double, 2, 3> Jproj;
      Jproj << fx * iz, 0.0, -fx * pc.x() * iz * iz, 0.0, fy * iz, -fy * pc.y() * iz * iz;
      // left increment: T <- Exp(delta) * T, d(pc)/d(delta) = [I | -[pc]x]
      Eigen::Matrix<double, 3, 6> Jpt;
      Jpt.leftCols<3>() = Eigen::Matrix3d::Identity();
      Jpt.rightCols<3>() = -skew(pc);
      const Eigen::Matrix<double, 2, 6> J = Jproj * Jpt;

      const double w = o.weight * huberWeight(r.norm(), cfg.huber_delta_px);
      H += w * J.transpose() * J;
      b += -w * J.transpose() * r;
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::Matrix<double, 6, 6> Hlm = H;
      Hlm.diagonal() += lambda * H.diagonal();
      const Eigen::Matrix<double, 6, 1> delta = Hlm.ldlt().solve(b);
      if (!delta.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Pose T_new = Pose::exp(delta.head<3>(), delta.tail<3>()) * T;
      const double new_cost = evalCost(T_new);
      if (new_cost <= cost) {
        const double decrease = cost - new_cost;
        T = T_new;
        cost = new_cost;
        lambda = std::max(lambda * 0.3, 1e-9);
        stepped = true;
        if (delta.norm() < cfg.step_tolerance || decrease < cfg.cost_tolerance) iter = cfg.max_iterations;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) break;
  }

  PoseOptimizerResult out;
  out.T_cw = T;
  out.final_cost = cost;
  out.inlier.resize(obs.size(), false);
  std::vector<double> errs;
  for (size_t i = 0; i < obs.size(); ++i) {
    const Eigen::Vector3d pc = T * obs[i].point_w;
    if (pc.z() <= 1e-9) continue;
    const Eigen::Vector2d px(fx * pc.x() / pc.z() + cam.cx(), fy * pc.y() / pc.z() + cam.cy());
    const double e2 = obs[i].weight * (px - obs[i].pixel).squaredNorm();
    if (e2 <= cfg.chi2_gate) {
      out.inlier[i] = true;
      ++out.inlier_count;
      errs.push_back(std::sqrt((px - obs[i].pixel).squaredNorm()));
    }
  }
  if (!errs.empty()) {
    std::sort(errs.begin(), errs.end());
    out.median_reproj_px = errs[(errs.size() - 1) / 2];
  }
  return out;
}

}  // namespace evslam
