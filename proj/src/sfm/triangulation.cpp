#include "evslam/sfm/triangulation.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace evslam {

namespace {
constexpr double kDegPerRad = 57.29577951308232;
}

double rayParallaxDeg(const Pose& T_wc_a, const Pose& T_wc_b, const Eigen::Vector3d& point) {
  const Eigen::Vector3d ra = (point - T_wc_a.translation()).normalized();
  const Eigen::Vector3d rb = (point - T_wc_b.translation()).normalized();
  const double c = std::clamp(ra.dot(rb), -1.0, 1.0);
  return std::acos(c) * kDegPerRad;
}

std::optional<Eigen::Vector3d> triangulate(const Pose& T_wc_a, const Pose& T_wc_b,
                                           const Eigen::Vector2d& px_a, const Eigen::Vector2d& px_b,
                                           const CameraModel& cam, const TriangulationGates& gates) {
  const Eigen::Vector2d na = cam.undistortNormalized(px_a);
  const Eigen::Vector2d nb = cam.undistortNormalized(px_b);

  const Pose T_cw_a = T_wc_a.inverse();
  const Pose T_cw_b = T_wc_b.inverse();

  // parallel-ray rejection on the world-frame ray directions
  const Eigen::Vector3d dir_a = T_wc_a.rotation() * Eigen::Vector3d(na.x(), na.y(), 1.0).normalized();
  const Eigen::Vector3d dir_b = T_wc_b.rotation() * Eigen::Vector3d(nb.x(), nb.y(), 1.0).normalized();
  const double cos_angle = std::clamp(dir_a.dot(dir_b), -1.0, 1.0);
  if (std::acos(cos_angle) * kDegPerRad < gates.min_ray_angle_deg) return std::nullopt;

  // DLT on the two projection equations
  Eigen::Matrix<double, 3, 4> Pa, Pb;
  Pa.leftCols<3>() = T_cw_a.rotationMatrix();
  Pa.rightCols<1>() = T_cw_a.translation();
  Pb.leftCols<3>() = T_cw_b.rotationMatrix();
  Pb.rightCols<1>() = T_cw_b.translation();

  Eigen::Matrix4d A;
  A.row(0) = na.x() * Pa.row(2) - Pa.row(0);
  A.row(1) = na.y() * Pa.row(2) - Pa.row(1);
  A.row(2) = nb.x() * Pb.row(2) - Pb.row(0);
  A.row(3) = nb.y() * Pb.row(2) - Pb.row(1);

  const Eigen::JacobiSVD<Eigen::Matrix4d> svd(A, Eigen::ComputeFullV);
  const Eigen::Vector4d X = svd.matrixV().col(3);
  if (std::abs(X(3)) < 1e-12) return std::nullopt;
  const Eigen::Vector3d point = X.head<3>() / X(3);

  const Eigen::Vector3d pc_a = T_cw_a * point;
  const Eigen::Vector3d pc_b = T_cw_b * point;
  if (pc_a.z() <= 0.0 || pc_b.z() <= 0.0) return std::nullopt;

  const auto ra = cam.project(pc_a);
  const auto rb = cam.project(pc_b);
  if (!ra || !rb) return std::nullopt;
  if ((*ra - px_a).norm() > gates.max_reprojection_px || (*rb - px_b).norm() > gates.max_reprojection_px)
    return std::nullopt;
  return point;
}

}  // namespace evslam
