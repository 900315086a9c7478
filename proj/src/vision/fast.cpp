#include "evslam/vision/fast.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace evslam {

namespace {

constexpr int kArc = 9;
constexpr std::array<std::pair<int, int>, 16> kCircle = {{
    {0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0}, {3, 1}, {2, 2}, {1, 3},
    {0, 3}, {-1, 3}, {-2, 2}, {-3, 1}, {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3},
}};

}  // namespace

float fastScoreAt(const ImageF& img, int x, int y, float threshold) {
  const float c = img.at(x, y);
  std::array<float, 16> ring;
  for (int i = 0; i < 16; ++i) ring[i] = img.at(x + kCircle[i].first, y + kCircle[i].second);

  // classify each circle pixel: brighter (+1), darker (-1), similar (0)
  std::array<int, 16> cls;
  for (int i = 0; i < 16; ++i) {
    if (ring[i] > c + threshold)
      cls[i] = 1;
    else if (ring[i] < c - threshold)
      cls[i] = -1;
    else
      cls[i] = 0;
  }

  float best = 0.0f;
  for (int sign : {1, -1}) {
    int run = 0;
    float sad = 0.0f;
    // walk twice around to catch wrap-around arcs
    for (int i = 0; i < 32; ++i) {
      const int j = i & 15;
      if (cls[j] == sign) {
        ++run;
        sad += std::abs(ring[j] - c);
        if (run >= kArc) best = std::max(best, sad);
        if (run == 16) break;  // full circle
      } else {
        run = 0;
        sad = 0.0f;
      }
    }
  }
  return best;
}

std::vector<Keypoint> detectFast(const ImageF& img, const FastConfig& cfg) {
  if (img.w < 7 || img.h < 7) throw std::invalid_argument("fast: image must be at least 7x7");
  const int margin = 3;

  ImageF score(img.w, img.h);
  for (int y = margin; y < img.h - margin; ++y)
    for (int x = margin; x < img.w - margin; ++x)
      score.at(x, y) = fastScoreAt(img, x, y, cfg.threshold);

  std::vector<Keypoint> raw;
  for (int y = margin; y < img.h - margin; ++y) {
    for (int x = margin; x < img.w - margin; ++x) {
      const float s = score.at(x, y);
      if (s <= 0.0f) continue;
      if (cfg.nonmax_suppression) {
        bool maximal = true;
        for (int dy = -1; dy <= 1 && maximal; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const float n = score.at(x + dx, y + dy);
            // strict on earlier-scanned neighbors keeps ties deterministic
            if (n > s || (n == s && (dy < 0 || (dy == 0 && dx < 0)))) {
              maximal = false;
              break;
            }
          }
        if (!maximal) continue;
      }
      raw.push_back({Eigen::Vector2f(static_cast<float>(x), static_cast<float>(y)), s, -1});
    }
  }

  // bucketing grid: per-cell top-capacity by response
  const double cell_w = static_cast<double>(img.w) / cfg.grid_cols;
  const double cell_h = static_cast<double>(img.h) / cfg.grid_rows;
  std::vector<std::vector<Keypoint>> cells(static_cast<size_t>(cfg.grid_cols) * cfg.grid_rows);
  for (const Keypoint& kp : raw) {
    const int cx = std::min(static_cast<int>(kp.px.x() / cell_w), cfg.grid_cols - 1);
    const int cy = std::min(static_cast<int>(kp.px.y() / cell_h), cfg.grid_rows - 1);
    cells[static_cast<size_t>(cy) * cfg.grid_cols + cx].push_back(kp);
  }
  std::vector<Keypoint> out;
  for (auto& cell : cells) {
    std::stable_sort(cell.begin(), cell.end(),
                     [](const Keypoint& a, const Keypoint& b) { return a.response > b.response; });
    const size_t keep = std::min<size_t>(cell.size(), cfg.cell_capacity);
    out.insert(out.end(), cell.begin(), cell.begin() + keep);
  }
  // deterministic order: row-major by position
  std::sort(out.begin(), out.end(), [](const Keypoint& a, const Keypoint& b) {
    return a.px.y() != b.px.y() ? a.px.y() < b.px.y() : a.px.x() < b.px.x();
  });
  return out;
}

}  // namespace evslam
