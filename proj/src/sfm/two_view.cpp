#include "evslam/sfm/two_view.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "evslam/sfm/triangulation.hpp"

namespace evslam {

namespace {

constexpr double kDegPerRad = 57.29577951308232;

struct NormalizedMatches {
  std::vector<Eigen::Vector2d> ref, cur;
};

// Hartley conditioning: zero-mean, mean distance sqrt(2).
Eigen::Matrix3d conditioningTransform(const std::vector<Eigen::Vector2d>& pts,
                                      std::span<const int> idx) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (int i : idx) mean += pts[i];
  mean /= static_cast<double>(idx.size());
  double dist = 0.0;
  for (int i : idx) dist += (pts[i] - mean).norm();
  dist /= static_cast<double>(idx.size());
  const double s = dist > 1e-12 ? std::sqrt(2.0) / dist : 1.0;
  Eigen::Matrix3d T = Eigen::Matrix3d::Identity();
  T(0, 0) = s;
  T(1, 1) = s;
  T(0, 2) = -s * mean.x();
  T(1, 2) = -s * mean.y();
  return T;
}

// 8-point algorithm on normalized image coordinates -> essential-like matrix.
std::optional<Eigen::Matrix3d> fitFundamental(const NormalizedMatches& m, std::span<const int> idx) {
  const Eigen::Matrix3d Ta = conditioningTransform(m.ref, idx);
  const Eigen::Matrix3d Tb = conditioningTransform(m.cur, idx);
  Eigen::MatrixXd A(idx.size(), 9);
  for (size_t r = 0; r < idx.size(); ++r) {
    const int i = idx[r];
    const Eigen::Vector3d a = Ta * m.ref[i].homogeneous();
    const Eigen::Vector3d b = Tb * m.cur[i].homogeneous();
    A.row(r) << b.x() * a.x(), b.x() * a.y(), b.x(), b.y() * a.x(), b.y() * a.y(), b.y(), a.x(),
        a.y(), 1.0;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::Matrix<double, 9, 1> f = svd.matrixV().col(8);
  Eigen::Matrix3d F;
  F << f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7), f(8);
  // rank-2 projection
  Eigen::JacobiSVD<Eigen::Matrix3d> svdf(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d s = svdf.singularValues();
  s(2) = 0.0;
  F = svdf.matrixU() * s.asDiagonal() * svdf.matrixV().transpose();
  F = Tb.transpose() * F * Ta;
  if (!F.allFinite()) return std::nullopt;
  return F;
}

// 4-point DLT homography on normalized coordinates, x_cur ~ H x_ref.
std::optional<Eigen::Matrix3d> fitHomography(const NormalizedMatches& m, std::span<const int> idx) {
  const Eigen::Matrix3d Ta = conditioningTransform(m.ref, idx);
  const Eigen::Matrix3d Tb = conditioningTransform(m.cur, idx);
  Eigen::MatrixXd A(2 * idx.size(), 9);
  for (size_t r = 0; r < idx.size(); ++r) {
    const int i = idx[r];
    const Eigen::Vector3d a = Ta * m.ref[i].homogeneous();
    const Eigen::Vector3d b = Tb * m.cur[i].homogeneous();
    A.row(2 * r) << 0, 0, 0, -a.x(), -a.y(), -1, b.y() * a.x(), b.y() * a.y(), b.y();
    A.row(2 * r + 1) << a.x(), a.y(), 1, 0, 0, 0, -b.x() * a.x(), -b.x() * a.y(), -b.x();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Eigen::Matrix3d H;
  H << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  H = Tb.inverse() * H * Ta;
  if (!H.allFinite() || std::abs(H(2, 2)) < 1e-12) return std::nullopt;
  return H / H(2, 2);
}

// Truncated symmetric scores in pixels (fx scales normalized residuals).
double scoreFundamental(const Eigen::Matrix3d& F, const NormalizedMatches& m, double f_px,
                        double th_px, std::vector<bool>* inliers) {
  const double th2 = th_px * th_px;
  double score = 0.0;
  for (size_t i = 0; i < m.ref.size(); ++i) {
    const Eigen::Vector3d a = m.ref[i].homogeneous();
    const Eigen::Vector3d b = m.cur[i].homogeneous();
    const Eigen::Vector3d lb = F * a;           // epipolar line in cur
    const Eigen::Vector3d la = F.transpose() * b;
    const double db = b.dot(lb) / std::hypot(lb.x(), lb.y());
    const double da = a.dot(la) / std::hypot(la.x(), la.y());
    const double e1 = db * db * f_px * f_px;
    const double e2 = da * da * f_px * f_px;
    bool ok = true;
    if (e1 < th2) score += th2 - e1; else ok = false;
    if (e2 < th2) score += th2 - e2; else ok = false;
    if (inliers) (*inliers)[i] = ok;
  }
  return score;
}

double scoreHomography(const Eigen::Matrix3d& H, const NormalizedMatches& m, double f_px,
                       double th_px, std::vector<bool>* inliers) {
  const double th2 = th_px * th_px;
  const Eigen::Matrix3d Hinv = H.inverse();
  double score = 0.0;
  for (size_t i = 0; i < m.ref.size(); ++i) {
    const Eigen::Vector3d fwd = H * m.ref[i].homogeneous();
    const Eigen::Vector3d bwd = Hinv * m.cur[i].homogeneous();
    double e1 = th2 + 1.0, e2 = th2 + 1.0;
    if (std::abs(fwd.z()) > 1e-12)
      e1 = (fwd.hnormalized() - m.cur[i]).squaredNorm() * f_px * f_px;
    if (std::abs(bwd.z()) > 1e-12)
      e2 = (bwd.hnormalized() - m.ref[i]).squaredNorm() * f_px * f_px;
    bool ok = true;
    if (e1 < th2) score += th2 - e1; else ok = false;
    if (e2 < th2) score += th2 - e2; else ok = false;
    if (inliers) (*inliers)[i] = ok;
  }
  return score;
}

std::vector<Pose> decomposeEssential(const Eigen::Matrix3d& E) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d U = svd.matrixU();
  Eigen::Matrix3d V = svd.matrixV();
  if (U.determinant() < 0.0) U.col(2) *= -1.0;
  if (V.determinant() < 0.0) V.col(2) *= -1.0;
  Eigen::Matrix3d W;
  W << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Eigen::Matrix3d R1 = U * W * V.transpose();
  const Eigen::Matrix3d R2 = U * W.transpose() * V.transpose();
  const Eigen::Vector3d t = U.col(2).normalized();
  return {Pose(R1, t), Pose(R1, -t), Pose(R2, t), Pose(R2, -t)};
}

// Faugeras SVD decomposition of a calibrated homography (8 hypotheses).
std::vector<Pose> decomposeHomography(const Eigen::Matrix3d& H) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d dvec = svd.singularValues();
  const double d1 = dvec(0), d2 = dvec(1), d3 = dvec(2);
  if (d1 / d2 < 1.0001 || d2 / d3 < 1.0001) return {};  // degenerate (pure rotation)

  Eigen::Matrix3d U = svd.matrixU();
  Eigen::Matrix3d V = svd.matrixV();
  const double s = U.determinant() * V.determinant();

  const double aux1 = std::sqrt((d1 * d1 - d2 * d2) / (d1 * d1 - d3 * d3));
  const double aux3 = std::sqrt((d2 * d2 - d3 * d3) / (d1 * d1 - d3 * d3));
  const std::array<double, 4> x1 = {aux1, aux1, -aux1, -aux1};
  const std::array<double, 4> x3 = {aux3, -aux3, aux3, -aux3};

  std::vector<Pose> out;
  // d' = +d2
  {
    const double aux_st = std::sqrt((d1 * d1 - d2 * d2) * (d2 * d2 - d3 * d3)) / ((d1 + d3) * d2);
    const double ct = (d2 * d2 + d1 * d3) / ((d1 + d3) * d2);
    const std::array<double, 4> st = {aux_st, -aux_st, -aux_st, aux_st};
    for (int i = 0; i < 4; ++i) {
      Eigen::Matrix3d Rp;
      Rp << ct, 0, -st[i], 0, 1, 0, st[i], 0, ct;
      const Eigen::Matrix3d R = s * U * Rp * V.transpose();
      Eigen::Vector3d tp(x1[i], 0.0, -x3[i]);
      tp *= d1 - d3;
      const Eigen::Vector3d t = (U * tp).normalized();
      out.emplace_back(R, t);
    }
  }
  // d' = -d2
  {
    const double aux_sp = std::sqrt((d1 * d1 - d2 * d2) * (d2 * d2 - d3 * d3)) / ((d1 - d3) * d2);
    const double cp = (d1 * d3 - d2 * d2) / ((d1 - d3) * d2);
    const std::array<double, 4> sp = {aux_sp, -aux_sp, -aux_sp, aux_sp};
    for (int i = 0; i < 4; ++i) {
      Eigen::Matrix3d Rp;
      Rp << cp, 0, sp[i], 0, -1, 0, sp[i], 0, -cp;
      const Eigen::Matrix3d R = s * U * Rp * V.transpose();
      Eigen::Vector3d tp(x1[i], 0.0, x3[i]);
      tp *= d1 + d3;
      const Eigen::Vector3d t = (U * tp).normalized();
      out.emplace_back(R, t);
    }
  }
  return out;
}

struct CheiralityStats {
  int good = 0;
  double median_parallax_deg = 0.0;
  std::vector<Eigen::Vector3d> points;
  std::vector<int> match_idx;
};

// Triangulate inliers under candidate (R, t) and count points that land with
// positive depth and small reprojection in both views.
CheiralityStats checkCheirality(const Pose& T_cur_ref, const NormalizedMatches& m,
                                const std::vector<bool>& inliers, double f_px, double th_px) {
  CheiralityStats stats;
  std::vector<double> parallaxes;
  const Pose T_ref = Pose::identity();          // world == reference camera
  const Pose T_wc_cur = T_cur_ref.inverse();    // camera pose in that world
  const double th2 = th_px * th_px * 16.0;      // loose gate, 4x threshold

  for (size_t i = 0; i < m.ref.size(); ++i) {
    if (!inliers[i]) continue;
    // triangulate in normalized coordinates (unit-focal camera)
    Eigen::Matrix4d A;
    Eigen::Matrix<double, 3, 4> Pa = Eigen::Matrix<double, 3, 4>::Zero();
    Pa.leftCols<3>().setIdentity();
    Eigen::Matrix<double, 3, 4> Pb;
    Pb.leftCols<3>() = T_cur_ref.rotationMatrix();
    Pb.rightCols<1>() = T_cur_ref.translation();
    A.row(0) = m.ref[i].x() * Pa.row(2) - Pa.row(0);
    A.row(1) = m.ref[i].y() * Pa.row(2) - Pa.row(1);
    A.row(2) = m.cur[i].x() * Pb.row(2) - Pb.row(0);
    A.row(3) = m.cur[i].y() * Pb.row(2) - Pb.row(1);
    const Eigen::JacobiSVD<Eigen::Matrix4d> svd(A, Eigen::ComputeFullV);
    const Eigen::Vector4d Xh = svd.matrixV().col(3);
    if (std::abs(Xh(3)) < 1e-12 || !Xh.allFinite()) continue;
    const Eigen::Vector3d X = Xh.head<3>() / Xh(3);

    const Eigen::Vector3d Xc = T_cur_ref * X;
    if (X.z() <= 0.0 || Xc.z() <= 0.0) continue;
    const double e_ref = (Eigen::Vector2d(X.x() / X.z(), X.y() / X.z()) - m.ref[i]).squaredNorm() *
                         f_px * f_px;
    const double e_cur =
        (Eigen::Vector2d(Xc.x() / Xc.z(), Xc.y() / Xc.z()) - m.cur[i]).squaredNorm() * f_px * f_px;
    if (e_ref > th2 || e_cur > th2) continue;

    ++stats.good;
    stats.points.push_back(X);
    stats.match_idx.push_back(static_cast<int>(i));
    parallaxes.push_back(rayParallaxDeg(T_ref, T_wc_cur, X));
  }
  if (!parallaxes.empty()) {
    std::sort(parallaxes.begin(), parallaxes.end());
    stats.median_parallax_deg = parallaxes[(parallaxes.size() - 1) / 2];
  }
  return stats;
}

}  // namespace

std::optional<TwoViewResult> twoViewInit(std::span<const Match2d> matches, const CameraModel& cam,
                                         bool relaxed, std::uint64_t seed, const TwoViewConfig& cfg,
                                         TwoViewFailure* why) {
  auto fail = [&](TwoViewFailure f) -> std::optional<TwoViewResult> {
    if (why) *why = f;
    return std::nullopt;
  };
  if (why) *why = TwoViewFailure::kNone;
  if (matches.size() < 8) return fail(TwoViewFailure::kInsufficientMatches);

  NormalizedMatches m;
  m.ref.reserve(matches.size());
  m.cur.reserve(matches.size());
  for (const auto& match : matches) {
    m.ref.push_back(cam.undistortNormalized(match.ref));
    m.cur.push_back(cam.undistortNormalized(match.cur));
  }
  const double f_px = 0.5 * (cam.fx() + cam.fy());
  const int n = static_cast<int>(matches.size());

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  auto sampleIdx = [&](int k) {
    std::vector<int> idx;
    while (static_cast<int>(idx.size()) < k) {
      const int c = pick(rng);
      if (std::find(idx.begin(), idx.end(), c) == idx.end()) idx.push_back(c);
    }
    return idx;
  };

  double best_f_score = 0.0, best_h_score = 0.0;
  Eigen::Matrix3d best_F = Eigen::Matrix3d::Zero(), best_H = Eigen::Matrix3d::Zero();
  bool have_f = false, have_h = false;
  for (int it = 0; it < cfg.ransac_iterations; ++it) {
    const auto idx_f = sampleIdx(8);
    if (const auto F = fitFundamental(m, idx_f)) {
      const double s = scoreFundamental(*F, m, f_px, cfg.inlier_threshold_px, nullptr);
      if (s > best_f_score) {
        best_f_score = s;
        best_F = *F;
        have_f = true;
      }
    }
    const auto idx_h = sampleIdx(4);
    if (const auto H = fitHomography(m, idx_h)) {
      const double s = scoreHomography(*H, m, f_px, cfg.inlier_threshold_px, nullptr);
      if (s > best_h_score) {
        best_h_score = s;
        best_H = *H;
        have_h = true;
      }
    }
  }
  if (!have_f && !have_h) return fail(TwoViewFailure::kAmbiguousModel);

  const double ratio = relaxed ? cfg.relaxed_score_ratio : cfg.strict_score_ratio;
  const double hs = have_h ? best_h_score : 0.0;
  const double fs = have_f ? best_f_score : 0.0;
  TwoViewModel model;
  if (hs > 0.0 && hs >= ratio * fs) {
    model = TwoViewModel::kHomography;
  } else if (fs > 0.0 && fs >= ratio * hs) {
    model = TwoViewModel::kFundamental;
  } else {
    return fail(TwoViewFailure::kAmbiguousModel);  // neither stands out
  }

  // refit on the winner's inliers, then decompose
  std::vector<bool> inliers(matches.size(), false);
  std::vector<Pose> candidates;
  if (model == TwoViewModel::kFundamental) {
    scoreFundamental(best_F, m, f_px, cfg.inlier_threshold_px, &inliers);
    std::vector<int> in_idx;
    for (int i = 0; i < n; ++i)
      if (inliers[i]) in_idx.push_back(i);
    if (in_idx.size() >= 8) {
      if (const auto F = fitFundamental(m, in_idx)) {
        best_F = *F;
        scoreFundamental(best_F, m, f_px, cfg.inlier_threshold_px, &inliers);
      }
    }
    candidates = decomposeEssential(best_F);
  } else {
    scoreHomography(best_H, m, f_px, cfg.inlier_threshold_px, &inliers);
    std::vector<int> in_idx;
    for (int i = 0; i < n; ++i)
      if (inliers[i]) in_idx.push_back(i);
    if (in_idx.size() >= 4) {
      if (const auto H = fitHomography(m, in_idx)) {
        best_H = *H;
        scoreHomography(best_H, m, f_px, cfg.inlier_threshold_px, &inliers);
      }
    }
    candidates = decomposeHomography(best_H);
  }
  if (candidates.empty()) return fail(TwoViewFailure::kLowParallax);

  CheiralityStats best_stats;
  int best_idx = -1, second = 0;
  for (size_t c = 0; c < candidates.size(); ++c) {
    auto stats = checkCheirality(candidates[c], m, inliers, f_px, cfg.inlier_threshold_px);
    if (stats.good > best_stats.good) {
      second = best_stats.good;
      best_stats = std::move(stats);
      best_idx = static_cast<int>(c);
    } else if (stats.good > second) {
      second = stats.good;
    }
  }
  if (best_idx < 0 || best_stats.good < cfg.min_triangulated) return fail(TwoViewFailure::kCheirality);
  if (!relaxed && second > cfg.ambiguity_ratio * best_stats.good)
    return fail(TwoViewFailure::kCheirality);

  const double min_parallax = relaxed ? cfg.relaxed_min_parallax_deg : cfg.strict_min_parallax_deg;
  if (best_stats.median_parallax_deg < min_parallax) return fail(TwoViewFailure::kLowParallax);

  TwoViewResult out;
  const Pose& T = candidates[best_idx];
  out.T_cur_ref = Pose(T.rotation(), T.translation().normalized());
  out.inlier = std::move(inliers);
  out.points = std::move(best_stats.points);
  out.point_match = std::move(best_stats.match_idx);
  out.model = model;
  out.parallax_deg = best_stats.median_parallax_deg;
  return out;
}

}  // namespace evslam
