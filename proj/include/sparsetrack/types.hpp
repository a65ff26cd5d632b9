#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sparsetrack {

using Embedding = Eigen::VectorXd;

/// Raised when shapes, dimensions or settings do not fit together.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed or inconsistent input data (files, sequences).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned box in corner form, pixel units.
struct BBox {
  double x_left = 0.0;
  double y_top = 0.0;
  double x_right = 0.0;
  double y_bottom = 0.0;

  static BBox from_ltwh(double left, double top, double width, double height) {
    return {left, top, left + width, top + height};
  }

  double width() const { return x_right - x_left; }
  double height() const { return y_bottom - y_top; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x_left + x_right); }
  double center_y() const { return 0.5 * (y_top + y_bottom); }
  bool valid() const { return x_right >= x_left && y_bottom >= y_top; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Detection {
  int64_t frame = 0;
  BBox box;
  double score = 0.0;
  Embedding embedding;
};

struct Tracklet {
  int64_t id = 0;
  Detection last_detection;
  Embedding smoothed_embedding;
  int64_t length = 0;          // matched frames
  int64_t frames_missing = 0;  // consecutive unmatched frames
  double last_score = 0.0;
};

struct TrackerConfig {
  int top_k = 100;
  double tau_init = 0.5;
  double tau_edge = 0.4;
  double tau_node = 0.4;
  int age_max_frames = 30;
  int age_min_frames = 10;
  int n_iter = 3;
  int edges_per_criterion = 10;
  // Center offsets enter the edge encoder divided by this many pixels.
  double position_scale = 100.0;
  int d_node = 64;
  int d_edge = 32;
  // Ablation switches; both on in normal operation.
  bool recovery = true;
  bool node_gate = true;

  /// Throws ConfigError naming the first violated bound.
  void validate() const;
};

struct TrainConfig {
  double w_size = 0.1;
  double w_off = 1.0;
  double w_edge = 0.1;
  double w_node = 10.0;
  double focal_gamma = 2.0;
  double focal_alpha = 0.25;
  double iou_label_threshold = 0.5;
  double learning_rate = 3e-3;
  // "adam": per-parameter adaptive steps. "gd": fixed-step gradient descent.
  std::string optimizer = "adam";
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  // Detection-loss knobs.
  int heatmap_stride = 4;
  double gaussian_min_overlap = 0.7;
  bool heatmap_raw_sum = false;
  double score_focal_alpha = 2.0;
  double score_focal_beta = 4.0;

  void validate() const;
};

}  // namespace sparsetrack
