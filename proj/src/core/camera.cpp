#include "evslam/core/camera.hpp"

#include <cmath>
#include <stdexcept>

namespace evslam {

namespace {
constexpr int kMaxInvertIters = 10;
constexpr double kInvertTol = 1e-8;
}  // namespace

CameraModel::CameraModel(CameraKind kind, int width, int height, double fx, double fy, double cx,
                         double cy, std::vector<double> distortion)
    : kind_(kind), width_(width), height_(height), fx_(fx), fy_(fy), cx_(cx), cy_(cy),
      dist_(std::move(distortion)) {
  if (fx_ <= 0.0 || fy_ <= 0.0) throw std::invalid_argument("camera: focal lengths must be positive");
  if (width_ <= 0 || height_ <= 0) throw std::invalid_argument("camera: non-positive image size");
  if (cx_ <= 0.0 || cx_ >= width_ || cy_ <= 0.0 || cy_ >= height_)
    throw std::invalid_argument("camera: principal point outside the image");
  const size_t want = kind_ == CameraKind::kKannalaBrandt ? 4 : 4;
  if (!dist_.empty() && dist_.size() < want)
    throw std::invalid_argument("camera: expected 4-5 distortion coefficients");
  if (kind_ == CameraKind::kPinholeRadTan && dist_.size() == 4) dist_.push_back(0.0);
}

bool CameraModel::hasDistortion() const {
  for (double d : dist_)
    if (d != 0.0) return true;
  return false;
}

namespace {

Eigen::Vector2d radtanDistort(const Eigen::Vector2d& xn, const std::vector<double>& d) {
  const double k1 = d[0], k2 = d[1], p1 = d[2], p2 = d[3], k3 = d.size() > 4 ? d[4] : 0.0;
  const double x = xn.x(), y = xn.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
  return {x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x),
          y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y};
}

Eigen::Matrix2d radtanJacobian(const Eigen::Vector2d& xn, const std::vector<double>& d) {
  const double k1 = d[0], k2 = d[1], p1 = d[2], p2 = d[3], k3 = d.size() > 4 ? d[4] : 0.0;
  const double x = xn.x(), y = xn.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
  const double dradial = k1 + r2 * (2.0 * k2 + 3.0 * k3 * r2);
  Eigen::Matrix2d J;
  J(0, 0) = radial + x * 2.0 * x * dradial + 2.0 * p1 * y + 6.0 * p2 * x;
  J(0, 1) = x * 2.0 * y * dradial + 2.0 * p1 * x + 2.0 * p2 * y;
  J(1, 0) = y * 2.0 * x * dradial + 2.0 * p1 * x + 2.0 * p2 * y;
  J(1, 1) = radial + y * 2.0 * y * dradial + 6.0 * p1 * y + 2.0 * p2 * x;
  return J;
}

// Kannala-Brandt angle polynomial r(theta) and its derivative.
double kbPoly(double theta, const std::vector<double>& k) {
  const double t2 = theta * theta;
  return theta * (1.0 + t2 * (k[0] + t2 * (k[1] + t2 * (k[2] + t2 * k[3]))));
}

double kbPolyDeriv(double theta, const std::vector<double>& k) {
  const double t2 = theta * theta;
  return 1.0 + t2 * (3.0 * k[0] + t2 * (5.0 * k[1] + t2 * (7.0 * k[2] + t2 * 9.0 * k[3])));
}

}  // namespace

std::optional<Eigen::Vector2d> CameraModel::project(const Eigen::Vector3d& P) const {
  if (kind_ == CameraKind::kPinholeRadTan) {
    if (P.z() <= 0.0) return std::nullopt;
    Eigen::Vector2d xn(P.x() / P.z(), P.y() / P.z());
    if (hasDistortion()) xn = radtanDistort(xn, dist_);
    return Eigen::Vector2d(fx_ * xn.x() + cx_, fy_ * xn.y() + cy_);
  }
  // Kannala-Brandt: angle from the optical axis drives the radius.
  const double norm = P.norm();
  if (norm <= 0.0) return std::nullopt;
  const double rxy = std::hypot(P.x(), P.y());
  const double theta = std::atan2(rxy, P.z());
  const double r = dist_.empty() ? theta : kbPoly(theta, dist_);
  if (rxy < 1e-15) return Eigen::Vector2d(cx_, cy_);
  const double ux = r * P.x() / rxy;
  const double uy = r * P.y() / rxy;
  return Eigen::Vector2d(fx_ * ux + cx_, fy_ * uy + cy_);
}

Eigen::Vector2d CameraModel::undistortNormalized(const Eigen::Vector2d& px) const {
  const Eigen::Vector2d m((px.x() - cx_) / fx_, (px.y() - cy_) / fy_);
  if (kind_ == CameraKind::kPinholeRadTan) {
    if (!hasDistortion()) return m;
    // Newton inversion of the distortion map.
    Eigen::Vector2d x = m;
    for (int i = 0; i < kMaxInvertIters; ++i) {
      const Eigen::Vector2d err = radtanDistort(x, dist_) - m;
      if (err.norm() < kInvertTol) return x;
      x -= radtanJacobian(x, dist_).inverse() * err;
    }
    if ((radtanDistort(x, dist_) - m).norm() < 1e-5) return x;
    throw std::domain_error("camera: distortion inversion did not converge");
  }
  const double r = m.norm();
  double theta = r;
  if (!dist_.empty()) {
    for (int i = 0; i < kMaxInvertIters; ++i) {
      const double err = kbPoly(theta, dist_) - r;
      if (std::abs(err) < kInvertTol) break;
      theta -= err / kbPolyDeriv(theta, dist_);
    }
    if (std::abs(kbPoly(theta, dist_) - r) > 1e-5)
      throw std::domain_error("camera: angle polynomial inversion did not converge");
  }
  if (theta >= M_PI / 2.0)
    throw std::domain_error("camera: ray at or behind the image plane");
  const double tan_theta = std::tan(theta);
  if (r < 1e-15) return Eigen::Vector2d::Zero();
  return m * (tan_theta / r);
}

Eigen::Vector3d CameraModel::unproject(const Eigen::Vector2d& px, double depth) const {
  if (depth <= 0.0) throw std::invalid_argument("camera: unproject needs positive depth");
  const Eigen::Vector2d xn = undistortNormalized(px);
  return {xn.x() * depth, xn.y() * depth, depth};
}

Eigen::Vector2d CameraModel::distortToPixel(const Eigen::Vector2d& xn) const {
  if (kind_ == CameraKind::kPinholeRadTan) {
    const Eigen::Vector2d xd = hasDistortion() ? radtanDistort(xn, dist_) : xn;
    return {fx_ * xd.x() + cx_, fy_ * xd.y() + cy_};
  }
  const auto px = project(Eigen::Vector3d(xn.x(), xn.y(), 1.0));
  return *px;
}

CameraModel CameraModel::rectified() const {
  return CameraModel(CameraKind::kPinholeRadTan, width_, height_, fx_, fy_, cx_, cy_, {});
}

EventRectifier::EventRectifier(const CameraModel& cam)
    : rectified_(cam.rectified()), width_(cam.width()), height_(cam.height()) {
  table_.resize(static_cast<size_t>(width_) * height_);
  valid_.assign(table_.size(), 0);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const size_t idx = static_cast<size_t>(y) * width_ + x;
      try {
        const Eigen::Vector2d xn = cam.undistortNormalized(Eigen::Vector2d(x, y));
        const double u = rectified_.fx() * xn.x() + rectified_.cx();
        const double v = rectified_.fy() * xn.y() + rectified_.cy();
        if (rectified_.inBounds(u, v)) {
          table_[idx] = Eigen::Vector2f(static_cast<float>(u), static_cast<float>(v));
          valid_[idx] = 1;
        }
      } catch (const std::domain_error&) {
        // pixel maps outside the calibrated field; leave invalid
      }
    }
  }
}

std::optional<Eigen::Vector2f> EventRectifier::lookup(int x, int y) const {
  if (x < 0 || x >= width_ || y < 0 || y >= height_) return std::nullopt;
  const size_t idx = static_cast<size_t>(y) * width_ + x;
  if (!valid_[idx]) return std::nullopt;
  return table_[idx];
}

EventWindow EventRectifier::rectify(std::span<const Event> events) const {
  EventWindow out;
  out.reserve(events.size());
  for (const Event& e : events) {
    const auto target = lookup(static_cast<int>(std::lround(e.x)), static_cast<int>(std::lround(e.y)));
    if (!target) continue;
    out.push_back({e.t, target->x(), target->y(), e.p});
  }
  return out;
}

}  // namespace evslam
