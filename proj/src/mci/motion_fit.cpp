#include "evslam/mci/motion_fit.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace evslam {

namespace {

double huberWeight(double e, double delta) { return e <= delta ? 1.0 : delta / e; }

double huberCost(double e2, double delta) {
  const double e = std::sqrt(e2);
  if (e <= delta) return 0.5 * e2;
  return delta * (e - 0.5 * delta);
}

struct NormPairs {
  std::vector<Eigen::Vector2d> a, b;
};

// Gauss-Newton over (tx, ty, theta[, sigma]) on the normalized plane with
// pixel-scaled residuals. Backtracking keeps the cost non-increasing.
bool solve(const NormPairs& pts, const std::vector<bool>& use, double fx, double fy,
           Planar2dTag tag, const MotionFitConfig& cfg, Sim2& T, std::vector<double>* step_costs) {
  const int dof = tag == Planar2dTag::kSim2 ? 4 : 3;

  auto evalCost = [&](const Sim2& W) {
    double cost = 0.0;
    for (size_t i = 0; i < pts.a.size(); ++i) {
      if (!use[i]) continue;
      const Eigen::Vector2d d = W * pts.a[i] - pts.b[i];
      const Eigen::Vector2d r(fx * d.x(), fy * d.y());
      cost += huberCost(r.squaredNorm(), cfg.huber_delta_px);
    }
    return cost;
  };

  double cost = evalCost(T);
  bool converged = false;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dof, dof);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dof);
    const Eigen::Matrix2d L = T.linear();
    Eigen::Matrix2d Lp;  // d(linear)/d(theta)
    const double c = std::cos(T.theta), s = std::sin(T.theta);
    Lp << -s, -c, c, -s;
    Lp *= T.scale;

    for (size_t i = 0; i < pts.a.size(); ++i) {
      if (!use[i]) continue;
      const Eigen::Vector2d w = T * pts.a[i];
      const Eigen::Vector2d d = w - pts.b[i];
      const Eigen::Vector2d r(fx * d.x(), fy * d.y());
      Eigen::Matrix<double, 2, 4> J;
      J.col(0) = Eigen::Vector2d(fx, 0.0);
      J.col(1) = Eigen::Vector2d(0.0, fy);
      const Eigen::Vector2d dth = Lp * pts.a[i];
      J.col(2) = Eigen::Vector2d(fx * dth.x(), fy * dth.y());
      const Eigen::Vector2d dsg = L * pts.a[i];
      J.col(3) = Eigen::Vector2d(fx * dsg.x(), fy * dsg.y());

      const double wgt = huberWeight(r.norm(), cfg.huber_delta_px);
      const auto Jd = J.leftCols(dof);
      H += wgt * Jd.transpose() * Jd;
      g += -wgt * Jd.transpose() * r;
    }

    Eigen::VectorXd step = H.ldlt().solve(g);
    if (!step.allFinite()) return false;

    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 10; ++bt) {
      Sim2 Tn = T;
      Tn.t.x() += alpha * step(0);
      Tn.t.y() += alpha * step(1);
      Tn.theta += alpha * step(2);
      if (dof == 4) Tn.scale *= std::exp(alpha * step(3));
      const double new_cost = evalCost(Tn);
      if (new_cost <= cost) {
        T = Tn;
        const double dec = cost - new_cost;
        cost = new_cost;
        if (step_costs) step_costs->push_back(cost);
        accepted = true;
        if (alpha * step.norm() < cfg.step_tolerance || dec < 1e-14) {
          converged = true;
          iter = cfg.max_iterations;
        }
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      converged = true;  // stuck at a (local) minimum
      break;
    }
    if (step.norm() < cfg.step_tolerance) {
      converged = true;
      break;
    }
  }
  return converged || cost == 0.0;
}

}  // namespace

std::optional<MotionFit> fit2dMotion(std::span<const TrackedPair> tracks, double dT,
                                     Planar2dTag tag, const CameraModel& cam,
                                     const std::optional<Sim2Twist>& init,
                                     const MotionFitConfig& cfg) {
  if (tracks.size() < 3) return std::nullopt;
  if (dT <= 0.0) throw std::invalid_argument("fit2dMotion: dT must be positive");

  NormPairs pts;
  pts.a.reserve(tracks.size());
  pts.b.reserve(tracks.size());
  for (const auto& tr : tracks) {
    pts.a.emplace_back((tr.ref.x() - cam.cx()) / cam.fx(), (tr.ref.y() - cam.cy()) / cam.fy());
    pts.b.emplace_back((tr.cur.x() - cam.cx()) / cam.fx(), (tr.cur.y() - cam.cy()) / cam.fy());
  }

  Sim2 T = init ? sim2Exp(*init, dT) : Sim2::identity();
  if (tag == Planar2dTag::kSe2) T.scale = 1.0;

  MotionFit out;
  out.tag = tag;
  std::vector<bool> use(tracks.size(), true);
  if (!solve(pts, use, cam.fx(), cam.fy(), tag, cfg, T, &out.step_costs)) return std::nullopt;

  // hard gate + one refit on the surviving set
  auto classify = [&](const Sim2& W, std::vector<bool>& mask) {
    int count = 0;
    for (size_t i = 0; i < pts.a.size(); ++i) {
      const Eigen::Vector2d d = W * pts.a[i] - pts.b[i];
      const double e = std::hypot(cam.fx() * d.x(), cam.fy() * d.y());
      mask[i] = e < cfg.inlier_threshold_px;
      count += mask[i];
    }
    return count;
  };
  std::vector<bool> inliers(tracks.size(), false);
  int n_in = classify(T, inliers);
  if (n_in >= 3 && n_in < static_cast<int>(tracks.size())) {
    Sim2 T2 = T;
    if (solve(pts, inliers, cam.fx(), cam.fy(), tag, cfg, T2, nullptr)) {
      T = T2;
      n_in = classify(T, inliers);
    }
  }
  if (n_in < 3) return std::nullopt;

  Sim2Twist logT = sim2Log(T);
  out.twist = logT.scaled(1.0 / dT);
  if (tag == Planar2dTag::kSe2) out.twist.sigma = 0.0;
  out.inlier = std::move(inliers);
  out.inlier_count = n_in;

  double final_cost = 0.0;
  for (size_t i = 0; i < pts.a.size(); ++i) {
    if (!out.inlier[i]) continue;
    const Eigen::Vector2d d = T * pts.a[i] - pts.b[i];
    final_cost += huberCost(Eigen::Vector2d(cam.fx() * d.x(), cam.fy() * d.y()).squaredNorm(),
                            cfg.huber_delta_px);
  }
  out.final_cost = final_cost;
  return out;
}

}  // namespace evslam
