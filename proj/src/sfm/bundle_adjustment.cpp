#include "evslam/sfm/bundle_adjustment.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace evslam {

namespace {

double huberWeight(double err_norm, double delta) {
  return err_norm <= delta ? 1.0 : delta / err_norm;
}

double huberCost(double err2, double delta) {
  const double e = std::sqrt(err2);
  if (e <= delta) return 0.5 * err2;
  return delta * (e - 0.5 * delta);
}

}  // namespace

void reprojectionJacobians(const Pose& T_cw, const Eigen::Vector3d& point_w, const CameraModel& cam,
                           Eigen::Vector2d* residual_from, const Eigen::Vector2d& pixel,
                           Eigen::Matrix<double, 2, 6>* J_pose, Eigen::Matrix<double, 2, 3>* J_point) {
  const Eigen::Vector3d pc = T_cw * point_w;
  const double iz = 1.0 / pc.z();
  const Eigen::Vector2d px(cam.fx() * pc.x() * iz + cam.cx(), cam.fy() * pc.y() * iz + cam.cy());
  if (residual_from) *residual_from = px - pixel;

  Eigen::Matrix<double, 2, 3> Jproj;
  Jproj << cam.fx() * iz, 0.0, -cam.fx() * pc.x() * iz * iz,
           0.0, cam.fy() * iz, -cam.fy() * pc.y() * iz * iz;
  if (J_pose) {
    Eigen::Matrix<double, 3, 6> Jpt;
    Jpt.leftCols<3>() = Eigen::Matrix3d::Identity();
    Jpt.rightCols<3>() = -skew(pc);
    *J_pose = Jproj * Jpt;
  }
  if (J_point) *J_point = Jproj * T_cw.rotationMatrix();
}

BaResult localBundleAdjustment(const std::vector<Pose>& T_cw, const std::vector<bool>& fixed_kf,
                               const std::vector<Eigen::Vector3d>& points,
                               const std::vector<BaObservation>& observations,
                               const CameraModel& cam, const BundleAdjusterConfig& cfg) {
  if (T_cw.size() != fixed_kf.size()) throw std::invalid_argument("ba: fixed flag count mismatch");
  if (T_cw.size() < 2) throw std::invalid_argument("ba: needs at least two keyframes");
  if (cam.hasDistortion()) throw std::invalid_argument("ba: expects a rectified camera");

  const int n_kf = static_cast<int>(T_cw.size());
  const int n_pt = static_cast<int>(points.size());

  // Free-pose index map (fixed anchors pin the gauge).
  std::vector<int> pose_idx(n_kf, -1);
  int n_free = 0;
  for (int i = 0; i < n_kf; ++i)
    if (!fixed_kf[i]) pose_idx[i] = n_free++;

  // Points seen by < 2 distinct keyframes stay constant.
  std::vector<std::vector<int>> point_kfs(n_pt);
  for (const auto& o : observations) {
    if (o.kf < 0 || o.kf >= n_kf || o.point < 0 || o.point >= n_pt)
      throw std::invalid_argument("ba: observation index out of range");
    auto& v = point_kfs[o.point];
    if (std::find(v.begin(), v.end(), o.kf) == v.end()) v.push_back(o.kf);
  }
  std::vector<bool> point_free(n_pt);
  for (int i = 0; i < n_pt; ++i) point_free[i] = point_kfs[i].size() >= 2;

  BaResult res;
  res.poses = T_cw;
  res.points = points;

  auto evalCost = [&](const std::vector<Pose>& poses, const std::vector<Eigen::Vector3d>& pts) {
    double cost = 0.0;
    for (const auto& o : observations) {
      const Eigen::Vector3d pc = poses[o.kf] * pts[o.point];
      if (pc.z() <= 1e-9) {
        cost += 1e9;
        continue;
      }
      const Eigen::Vector2d px(cam.fx() * pc.x() / pc.z() + cam.cx(),
                               cam.fy() * pc.y() / pc.z() + cam.cy());
      cost += o.weight * huberCost((px - o.pixel).squaredNorm(), cfg.huber_delta_px);
    }
    return cost;
  };

  double cost = evalCost(res.poses, res.points);
  res.initial_cost = cost;
  double lambda = 1e-4;

  // Per-point observation buckets for the Schur pass.
  std::vector<std::vector<int>> obs_of_point(n_pt);
  for (int k = 0; k < static_cast<int>(observations.size()); ++k)
    obs_of_point[observations[k].point].push_back(k);

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    Eigen::MatrixXd Hcc = Eigen::MatrixXd::Zero(6 * n_free, 6 * n_free);
    Eigen::VectorXd bc = Eigen::VectorXd::Zero(6 * n_free);
    std::vector<Eigen::Matrix3d> Hpp(n_pt, Eigen::Matrix3d::Zero());
    std::vector<Eigen::Vector3d> bp(n_pt, Eigen::Vector3d::Zero());
    // W blocks keyed per (observation); observation ties one pose to one point
    std::vector<Eigen::Matrix<double, 6, 3>> W(observations.size(),
                                               Eigen::Matrix<double, 6, 3>::Zero());
    std::vector<bool> obs_valid(observations.size(), false);

    for (size_t k = 0; k < observations.size(); ++k) {
      const auto& o = observations[k];
      const Eigen::Vector3d pc = res.poses[o.kf] * res.points[o.point];
      if (pc.z() <= 1e-9) continue;
      Eigen::Vector2d r;
      Eigen::Matrix<double, 2, 6> Jc;
      Eigen::Matrix<double, 2, 3> Jp;
      reprojectionJacobians(res.poses[o.kf], res.points[o.point], cam, &r, o.pixel, &Jc, &Jp);
      const double w = o.weight * huberWeight(r.norm(), cfg.huber_delta_px);
      obs_valid[k] = true;

      const int ci = pose_idx[o.kf];
      const bool pt_free = point_free[o.point];
      if (ci >= 0) {
        Hcc.block<6, 6>(6 * ci, 6 * ci) += w * Jc.transpose() * Jc;
        bc.segment<6>(6 * ci) += -w * Jc.transpose() * r;
      }
      if (pt_free) {
        Hpp[o.point] += w * Jp.transpose() * Jp;
        bp[o.point] += -w * Jp.transpose() * r;
        if (ci >= 0) W[k] = w * Jc.transpose() * Jp;
      }
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 8 && !stepped; ++attempt) {
      Eigen::MatrixXd S = Hcc;
      S.diagonal() += lambda * Hcc.diagonal();
      Eigen::VectorXd rhs = bc;

      std::vector<Eigen::Matrix3d> Hpp_inv(n_pt, Eigen::Matrix3d::Zero());
      for (int i = 0; i < n_pt; ++i) {
        if (!point_free[i]) continue;
        Eigen::Matrix3d Hd = Hpp[i];
        Hd.diagonal() += lambda * Hpp[i].diagonal();
        Hpp_inv[i] = Hd.inverse();
      }

      // Schur complement: subtract W Hpp^-1 W^T couple terms.
      for (int i = 0; i < n_pt; ++i) {
        if (!point_free[i]) continue;
        const auto& ks = obs_of_point[i];
        for (int ka : ks) {
          if (!obs_valid[ka]) continue;
          const int ca = pose_idx[observations[ka].kf];
          if (ca < 0) continue;
          rhs.segment<6>(6 * ca) -= W[ka] * (Hpp_inv[i] * bp[i]);
          for (int kb : ks) {
            if (!obs_valid[kb]) continue;
            const int cb = pose_idx[observations[kb].kf];
            if (cb < 0) continue;
            S.block<6, 6>(6 * ca, 6 * cb) -= W[ka] * Hpp_inv[i] * W[kb].transpose();
          }
        }
      }

      Eigen::VectorXd delta_c = Eigen::VectorXd::Zero(6 * n_free);
      if (n_free > 0) {
        delta_c = S.ldlt().solve(rhs);
        if (!delta_c.allFinite()) {
          lambda *= 10.0;
          continue;
        }
      }

      std::vector<Pose> new_poses = res.poses;
      for (int j = 0; j < n_kf; ++j) {
        const int cj = pose_idx[j];
        if (cj < 0) continue;
        const auto d = delta_c.segment<6>(6 * cj);
        new_poses[j] = Pose::exp(d.head<3>(), d.tail<3>()) * res.poses[j];
      }
      std::vector<Eigen::Vector3d> new_points = res.points;
      for (int i = 0; i < n_pt; ++i) {
        if (!point_free[i]) continue;
        Eigen::Vector3d acc = bp[i];
        for (int ka : obs_of_point[i]) {
          if (!obs_valid[ka]) continue;
          const int ca = pose_idx[observations[ka].kf];
          if (ca < 0) continue;
          acc -= W[ka].transpose() * delta_c.segment<6>(6 * ca);
        }
        new_points[i] += Hpp_inv[i] * acc;
      }

      const double new_cost = evalCost(new_poses, new_points);
      if (new_cost < cost) {
        double step_norm = delta_c.norm();
        const double decrease = cost - new_cost;
        res.poses = std::move(new_poses);
        res.points = std::move(new_points);
        cost = new_cost;
        res.step_costs.push_back(cost);
        lambda = std::max(lambda * 0.3, 1e-9);
        stepped = true;
        if (step_norm < cfg.step_tolerance || decrease < cfg.cost_tolerance) iter = cfg.max_iterations;
      } else {
        lambda *= 10.0;
      }
    }
    if (!stepped) break;
  }

  res.final_cost = cost;
  res.obs_inlier.resize(observations.size(), false);
  for (size_t k = 0; k < observations.size(); ++k) {
    const auto& o = observations[k];
    const Eigen::Vector3d pc = res.poses[o.kf] * res.points[o.point];
    if (pc.z() <= 1e-9) continue;
    const Eigen::Vector2d px(cam.fx() * pc.x() / pc.z() + cam.cx(),
                             cam.fy() * pc.y() / pc.z() + cam.cy());
    res.obs_inlier[k] = o.weight * (px - o.pixel).squaredNorm() <= cfg.chi2_gate;
  }
  return res;
}

}  // namespace evslam
