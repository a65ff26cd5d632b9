#pragma once

// Center-heatmap detection losses as pure functions over supplied
// prediction maps. No backbone lives in this project; these exist so the
// loss math can be checked and reused.

#include "sparsetrack/training.hpp"

#include <Eigen/Core>

#include <array>

namespace sparsetrack {

struct HeatmapSpec {
  Eigen::MatrixXd grid;  // grid_h x grid_w, entries >= 0
  int stride = 4;
  int skipped = 0;       // objects whose quantized center fell outside the grid
};

/// Gaussian radius (feature-map cells) for a box of the given size in cells,
/// such that a box displaced by that radius keeps at least `min_overlap` IoU.
double gaussian_radius(double height, double width, double min_overlap);

/// Sigma of an object's Gaussian: diameter / 6, diameter = 2 * floor(radius) + 1.
double gaussian_sigma(const BBox& box, int stride, double min_overlap);

/// Quantized center cell (x, y) of a box.
std::array<int, 2> center_cell(const BBox& box, int stride);

/// Sum of per-object Gaussians centered on the quantized centers. Clamped to
/// at most 1 unless cfg.heatmap_raw_sum is set.
HeatmapSpec gen_heatmap(const std::vector<GtObject>& gts, int grid_h, int grid_w, const TrainConfig& cfg);

struct DetectionPredictions {
  Eigen::MatrixXd score;              // grid_h x grid_w probabilities
  std::array<Eigen::MatrixXd, 4> size;    // s_l, s_r, s_t, s_b in feature-map cells
  std::array<Eigen::MatrixXd, 2> offset;  // o_x, o_y
};

struct DetectionLoss {
  double score = 0.0;
  double size = 0.0;
  double offset = 0.0;
  double total = 0.0;  // score + w_size * size + w_off * offset
};

/// Size and offset targets (in cells) for one object.
std::array<double, 4> size_target(const BBox& box, int stride);
std::array<double, 2> offset_target(const BBox& box, int stride);

DetectionLoss detection_loss_terms(const DetectionPredictions& pred, const std::vector<GtObject>& gts,
                                   const TrainConfig& cfg);

}  // namespace sparsetrack
