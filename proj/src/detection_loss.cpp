#include "sparsetrack/detection_loss.hpp"

#include <algorithm>
#include <cmath>

namespace sparsetrack {

double gaussian_radius(double height, double width, double min_overlap) {
  const double b1 = height + width;
  const double c1 = width * height * (1.0 - min_overlap) / (1.0 + min_overlap);
  const double r1 = (b1 + std::sqrt(b1 * b1 - 4.0 * c1)) / 2.0;

  const double a2 = 4.0;
  const double b2 = 2.0 * (height + width);
  const double c2 = (1.0 - min_overlap) * width * height;
  const double r2 = (b2 + std::sqrt(b2 * b2 - 4.0 * a2 * c2)) / 2.0;

  const double a3 = 4.0 * min_overlap;
  const double b3 = -2.0 * min_overlap * (height + width);
  const double c3 = (min_overlap - 1.0) * width * height;
  const double r3 = (b3 + std::sqrt(b3 * b3 - 4.0 * a3 * c3)) / 2.0;
  return std::min({r1, r2, r3});
}

double gaussian_sigma(const BBox& box, int stride, double min_overlap) {
  const double h = std::ceil(box.height() / stride);
  const double w = std::ceil(box.width() / stride);
  const double radius = std::max(0.0, std::floor(gaussian_radius(h, w, min_overlap)));
  return (2.0 * radius + 1.0) / 6.0;
}

std::array<int, 2> center_cell(const BBox& box, int stride) {
  return {static_cast<int>(std::floor(box.center_x() / stride)), static_cast<int>(std::floor(box.center_y() / stride))};
}

std::array<double, 4> size_target(const BBox& box, int stride) {
  const double cx = box.center_x();
  const double cy = box.center_y();
  const double s = static_cast<double>(stride);
  return {(cx - box.x_left) / s, (box.x_right - cx) / s, (cy - box.y_top) / s, (box.y_bottom - cy) / s};
}

std::array<double, 2> offset_target(const BBox& box, int stride) {
  const double qx = box.center_x() / stride;
  const double qy = box.center_y() / stride;
  return {qx - std::floor(qx), qy - std::floor(qy)};
}

HeatmapSpec gen_heatmap(const std::vector<GtObject>& gts, int grid_h, int grid_w, const TrainConfig& cfg) {
  if (grid_h < 1 || grid_w < 1) throw ConfigError("gen_heatmap: grid dimensions must be positive");
  HeatmapSpec hm;
  hm.stride = cfg.heatmap_stride;
  hm.grid = Eigen::MatrixXd::Zero(grid_h, grid_w);
  for (const auto& gt : gts) {
    const auto [cx, cy] = center_cell(gt.box, cfg.heatmap_stride);
    if (cx < 0 || cy < 0 || cx >= grid_w || cy >= grid_h) {
      ++hm.skipped;
      continue;
    }
    const double sigma = gaussian_sigma(gt.box, cfg.heatmap_stride, cfg.gaussian_min_overlap);
    const double denom = 2.0 * sigma * sigma;
    for (int y = 0; y < grid_h; ++y) {
      for (int x = 0; x < grid_w; ++x) {
        const double d2 = static_cast<double>((x - cx) * (x - cx) + (y - cy) * (y - cy));
        hm.grid(y, x) += std::exp(-d2 / denom);
      }
    }
  }
  if (!cfg.heatmap_raw_sum) hm.grid = hm.grid.cwiseMin(1.0);
  return hm;
}

DetectionLoss detection_loss_terms(const DetectionPredictions& pred, const std::vector<GtObject>& gts,
                                   const TrainConfig& cfg) {
  const Eigen::Index h = pred.score.rows();
  const Eigen::Index w = pred.score.cols();
  if (h < 1 || w < 1) throw ConfigError("detection_loss_terms: empty score map");
  for (const auto& m : pred.size) {
    if (m.rows() != h || m.cols() != w) throw ConfigError("detection_loss_terms: size map shape differs from score map");
  }
  for (const auto& m : pred.offset) {
    if (m.rows() != h || m.cols() != w) throw ConfigError("detection_loss_terms: offset map shape differs from score map");
  }

  DetectionLoss loss;
  const HeatmapSpec hm = gen_heatmap(gts, static_cast<int>(h), static_cast<int>(w), cfg);
  int placed = 0;
  double size_err = 0.0;
  double off_err = 0.0;
  for (const auto& gt : gts) {
    const auto [cx, cy] = center_cell(gt.box, cfg.heatmap_stride);
    if (cx < 0 || cy < 0 || cx >= w || cy >= h) continue;
    ++placed;
    const auto st = size_target(gt.box, cfg.heatmap_stride);
    const auto ot = offset_target(gt.box, cfg.heatmap_stride);
    for (int k = 0; k < 4; ++k) size_err += std::abs(pred.size[k](cy, cx) - st[k]);
    for (int k = 0; k < 2; ++k) off_err += std::abs(pred.offset[k](cy, cx) - ot[k]);
  }
  if (placed == 0) return loss;
  loss.size = size_err / (4.0 * placed);
  loss.offset = off_err / (2.0 * placed);

  // Penalty-reduced pixelwise focal loss, normalized by the number of peaks.
  double score_sum = 0.0;
  int peaks = 0;
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      const double p = std::clamp(pred.score(y, x), kFocalEps, 1.0 - kFocalEps);
      const double target = hm.grid(y, x);
      if (target >= 1.0) {
        score_sum += std::pow(1.0 - p, cfg.score_focal_alpha) * std::log(p);
        ++peaks;
      } else {
        score_sum += std::pow(1.0 - target, cfg.score_focal_beta) * std::pow(p, cfg.score_focal_alpha) * std::log(1.0 - p);
      }
    }
  }
  loss.score = -score_sum / std::max(peaks, 1);
  loss.total = loss.score + cfg.w_size * loss.size + cfg.w_off * loss.offset;
  return loss;
}

}  // namespace sparsetrack
