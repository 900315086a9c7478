#include "evslam/core/lie.hpp"

#include <cmath>

namespace evslam {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr std::uint32_t kRenormAfter = 1000;
}  // namespace

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix3d so3Exp(const Eigen::Vector3d& w) {
  const double theta = w.norm();
  const Eigen::Matrix3d W = skew(w);
  if (theta < kSmallAngle) {
    return Eigen::Matrix3d::Identity() + W + 0.5 * W * W;
  }
  const double s = std::sin(theta) / theta;
  const double c = (1.0 - std::cos(theta)) / (theta * theta);
  return Eigen::Matrix3d::Identity() + s * W + c * W * W;
}

Eigen::Vector3d so3Log(const Eigen::Quaterniond& q) {
  Eigen::Quaterniond qn = q.normalized();
  if (qn.w() < 0.0) qn.coeffs() *= -1.0;
  const double sin_half = qn.vec().norm();
  const double cos_half = qn.w();
  const double angle = 2.0 * std::atan2(sin_half, cos_half);
  if (angle >= kPi - 1e-10) {
    throw std::domain_error("so3Log: rotation angle at pi is degenerate");
  }
  if (sin_half < kSmallAngle) {
    return 2.0 * qn.vec() * (1.0 + sin_half * sin_half / (6.0 * cos_half * cos_half)) / cos_half;
  }
  return qn.vec() * (angle / sin_half);
}

Eigen::Vector3d so3Log(const Eigen::Matrix3d& R) { return so3Log(Eigen::Quaterniond(R)); }

namespace {

// Left Jacobian of SO(3): integrates rotation for the SE(3) exp translation.
Eigen::Matrix3d so3LeftJacobian(const Eigen::Vector3d& w) {
  const double theta = w.norm();
  const Eigen::Matrix3d W = skew(w);
  if (theta < kSmallAngle) {
    return Eigen::Matrix3d::Identity() + 0.5 * W + W * W / 6.0;
  }
  const double t2 = theta * theta;
  const double a = (1.0 - std::cos(theta)) / t2;
  const double b = (theta - std::sin(theta)) / (t2 * theta);
  return Eigen::Matrix3d::Identity() + a * W + b * W * W;
}

Eigen::Matrix3d so3LeftJacobianInv(const Eigen::Vector3d& w) {
  const double theta = w.norm();
  const Eigen::Matrix3d W = skew(w);
  if (theta < kSmallAngle) {
    return Eigen::Matrix3d::Identity() - 0.5 * W + W * W / 12.0;
  }
  const double half = 0.5 * theta;
  const double cot = half / std::tan(half);
  const double c = (1.0 - cot) / (theta * theta);
  return Eigen::Matrix3d::Identity() - 0.5 * W + c * W * W;
}

}  // namespace

Pose::Pose(const Eigen::Quaterniond& q, Eigen::Vector3d t) : q_(q.normalized()), t_(std::move(t)) {}

Pose::Pose(const Eigen::Matrix3d& R, const Eigen::Vector3d& t) : q_(R), t_(t) { q_.normalize(); }

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotationMatrix();
  m.topRightCorner<3, 1>() = t_;
  return m;
}

Pose Pose::operator*(const Pose& rhs) const {
  Pose out;
  out.q_ = q_ * rhs.q_;
  out.t_ = q_ * rhs.t_ + t_;
  out.composed_ = std::max(composed_, rhs.composed_) + 1;
  if (out.composed_ > kRenormAfter) {
    out.q_.normalize();
    out.composed_ = 0;
  }
  return out;
}

Pose Pose::inverse() const {
  Pose out;
  out.q_ = q_.conjugate();
  out.t_ = -(out.q_ * t_);
  out.composed_ = composed_;
  return out;
}

Pose Pose::exp(const Eigen::Vector3d& v, const Eigen::Vector3d& w) {
  const Eigen::Matrix3d R = so3Exp(w);
  const Eigen::Vector3d t = so3LeftJacobian(w) * v;
  return Pose(Eigen::Quaterniond(R), t);
}

Eigen::Matrix<double, 6, 1> Pose::log() const {
  const Eigen::Vector3d w = so3Log(q_);
  const Eigen::Vector3d v = so3LeftJacobianInv(w) * t_;
  Eigen::Matrix<double, 6, 1> out;
  out << v, w;
  return out;
}

bool Pose::isApprox(const Pose& other, double tol) const {
  const double dq = std::min((q_.coeffs() - other.q_.coeffs()).norm(),
                             (q_.coeffs() + other.q_.coeffs()).norm());
  return dq < tol && (t_ - other.t_).norm() < tol;
}

Pose se3Exp(const Se3Twist& psi, double dt) {
  return Pose::exp(psi.v * dt, psi.w * dt);
}

Se3Twist se3Log(const Pose& T) {
  const auto x = T.log();
  return {x.head<3>(), x.tail<3>()};
}

Eigen::Matrix2d Sim2::linear() const {
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix2d m;
  m << c, -s, s, c;
  return scale * m;
}

Sim2 Sim2::operator*(const Sim2& rhs) const {
  Sim2 out;
  out.scale = scale * rhs.scale;
  out.theta = theta + rhs.theta;
  out.t = linear() * rhs.t + t;
  return out;
}

Sim2 Sim2::inverse() const {
  Sim2 out;
  out.scale = 1.0 / scale;
  out.theta = -theta;
  out.t = -(out.linear() * t);
  return out;
}

namespace {

// A = sigma*I + omega*J generates the Sim(2) linear part; the translation
// integrates through V(A) = A^-1 (e^A - I), with a series when ||A|| is tiny.
Eigen::Matrix2d sim2V(double sigma, double omega) {
  Eigen::Matrix2d A;
  A << sigma, -omega, omega, sigma;
  const double a = std::hypot(sigma, omega);
  if (a < kSmallAngle) {
    return Eigen::Matrix2d::Identity() + 0.5 * A + A * A / 6.0;
  }
  const double es = std::exp(sigma);
  Eigen::Matrix2d expA;
  const double c = std::cos(omega), s = std::sin(omega);
  expA << es * c, -es * s, es * s, es * c;
  return A.inverse() * (expA - Eigen::Matrix2d::Identity());
}

}  // namespace

Sim2 sim2Exp(const Sim2Twist& psi, double dt) {
  const double sigma = psi.sigma * dt;
  const double omega = psi.omega * dt;
  Sim2 out;
  out.scale = std::exp(sigma);
  out.theta = omega;
  out.t = sim2V(sigma, omega) * Eigen::Vector2d(psi.vx * dt, psi.vy * dt);
  return out;
}

Sim2Twist sim2Log(const Sim2& T) {
  if (T.scale <= 0.0) throw std::domain_error("sim2Log: non-positive scale");
  const double sigma = std::log(T.scale);
  // theta normalized to (-pi, pi]
  double omega = std::remainder(T.theta, 2.0 * kPi);
  const Eigen::Vector2d v = sim2V(sigma, omega).inverse() * T.t;
  return {v.x(), v.y(), omega, sigma};
}

}  // namespace evslam
