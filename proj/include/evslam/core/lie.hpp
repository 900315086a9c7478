#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>

namespace evslam {

// Small-angle cutoff below which exp/log switch to their series expansions.
inline constexpr double kSmallAngle = 1e-8;

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

// SO(3) exponential / logarithm. log throws std::domain_error when the
// rotation angle reaches pi (axis sign is ambiguous there).
Eigen::Matrix3d so3Exp(const Eigen::Vector3d& w);
Eigen::Vector3d so3Log(const Eigen::Matrix3d& R);
Eigen::Vector3d so3Log(const Eigen::Quaterniond& q);

/// Rigid transform p_out = R * p_in + t, stored as unit quaternion + vector.
class Pose {
 public:
  Pose() : q_(Eigen::Quaterniond::Identity()), t_(Eigen::Vector3d::Zero()) {}
  Pose(const Eigen::Quaterniond& q, Eigen::Vector3d t);
  Pose(const Eigen::Matrix3d& R, const Eigen::Vector3d& t);

  static Pose identity() { return Pose(); }

  const Eigen::Quaterniond& rotation() const { return q_; }
  const Eigen::Vector3d& translation() const { return t_; }
  Eigen::Matrix3d rotationMatrix() const { return q_.toRotationMatrix(); }
  Eigen::Matrix4d matrix() const;

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return q_ * p + t_; }
  Pose operator*(const Pose& rhs) const;
  Pose inverse() const;

  // se(3) tangent is (v, w): translational part first, rotational second.
  static Pose exp(const Eigen::Vector3d& v, const Eigen::Vector3d& w);
  Eigen::Matrix<double, 6, 1> log() const;

  bool isApprox(const Pose& other, double tol = 1e-9) const;

 private:
  Eigen::Quaterniond q_;
  Eigen::Vector3d t_;
  // Quaternion drift control: renormalize once a composition chain gets long.
  std::uint32_t composed_ = 0;
};

/// Constant-rate se(3) twist (v in m/s, w in rad/s).
struct Se3Twist {
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  Eigen::Vector3d w = Eigen::Vector3d::Zero();

  Se3Twist scaled(double dt) const { return {v * dt, w * dt}; }
  bool isZero() const { return v.isZero(0.0) && w.isZero(0.0); }
};

Pose se3Exp(const Se3Twist& psi, double dt = 1.0);
Se3Twist se3Log(const Pose& T);  // rate form: caller divides by the time span

enum class Planar2dTag { kSe2, kSim2 };

/// Planar similarity p_out = s * R(theta) * p_in + t. SE(2) is s == 1.
struct Sim2 {
  double scale = 1.0;
  double theta = 0.0;
  Eigen::Vector2d t = Eigen::Vector2d::Zero();

  static Sim2 identity() { return {}; }

  Eigen::Matrix2d linear() const;
  Eigen::Vector2d operator*(const Eigen::Vector2d& p) const { return linear() * p + t; }
  Sim2 operator*(const Sim2& rhs) const;
  Sim2 inverse() const;
};

/// Tangent of Sim(2): translation rate, angular rate, log-scale rate.
/// SE(2) twists keep sigma == 0.
struct Sim2Twist {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;
  double sigma = 0.0;

  Sim2Twist scaled(double dt) const { return {vx * dt, vy * dt, omega * dt, sigma * dt}; }
  bool isZero() const { return vx == 0.0 && vy == 0.0 && omega == 0.0 && sigma == 0.0; }
};

Sim2 sim2Exp(const Sim2Twist& psi, double dt = 1.0);
Sim2Twist sim2Log(const Sim2& T);

}  // namespace evslam
