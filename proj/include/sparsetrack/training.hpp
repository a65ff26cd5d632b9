#pragma once

// Pseudo labels, association losses and their analytic gradients, and a
// plain gradient-descent loop over labeled frame pairs.

#include "sparsetrack/graph_builder.hpp"
#include "sparsetrack/mpn.hpp"
#include "sparsetrack/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sparsetrack {

struct GtObject {
  int64_t id = 0;
  BBox box;
  double visibility = 1.0;
};

struct NodeLabels {
  std::vector<int> positive;                  // ny in {0,1}
  std::vector<std::optional<int64_t>> gt_id;  // set iff positive
};

/// Labels per materialized pair, aligned with SparseGraph::pairs.
struct EdgeLabels {
  std::vector<int> label;              // ey in {0,1}
  std::vector<int> has_positive_end;   // ny_i = 1 or ny_j = 1
};

/// IoU-Hungarian matching of detections to GT objects; matches below
/// iou_threshold are dropped.
NodeLabels assign_pseudo_labels(const std::vector<Detection>& detections, const std::vector<GtObject>& gts,
                                double iou_threshold);

EdgeLabels assign_edge_labels(const NodeLabels& labels_t1, const NodeLabels& labels_t2, const SparseGraph& graph);

inline constexpr double kFocalEps = 1e-7;

/// Binary focal loss; p is clamped to [eps, 1 - eps].
double focal_loss(double p, int y, double gamma, double alpha);

/// d focal_loss / d p (zero where the clamp is active).
double focal_loss_derivative(double p, int y, double gamma, double alpha);

/// Mean focal loss over pairs with at least one positive endpoint; 0 if none.
double edge_loss(const std::vector<double>& edge_scores, const EdgeLabels& labels, const TrainConfig& cfg);

/// Focal loss summed over all t2 nodes, divided by the number of positive t2 nodes; 0 if none.
double node_loss(const std::vector<double>& node_scores_t2, const NodeLabels& labels_t2, const TrainConfig& cfg);

double association_loss(double edge_loss_value, double node_loss_value, const TrainConfig& cfg);

/// One training example: a graph between two frames and its labels.
struct LabeledPair {
  SparseGraph graph;
  NodeLabels labels_t1;
  NodeLabels labels_t2;
  EdgeLabels edge_labels;
};

/// Builds the graph and all labels for two frames of detections with GT.
LabeledPair make_labeled_pair(const std::vector<Detection>& detections_t1, const std::vector<GtObject>& gt_t1,
                              const std::vector<Detection>& detections_t2, const std::vector<GtObject>& gt_t2,
                              int edges_per_criterion, double iou_threshold,
                              double position_scale = TrackerConfig{}.position_scale);

struct LossValue {
  double edge = 0.0;
  double node = 0.0;
  double total = 0.0;
};

LossValue evaluate_loss(const LabeledPair& pair, const MpnParameters& params, int n_iter, const TrainConfig& cfg);

struct GradientResult {
  LossValue loss;
  MpnParameters gradient;  // same shapes as the parameters
};

/// Exact gradient of the association loss with respect to every parameter,
/// by reverse-mode differentiation through classifiers, node updates, edge
/// updates and the edge encoder.
GradientResult association_gradients(const LabeledPair& pair, const MpnParameters& params, int n_iter,
                                     const TrainConfig& cfg);

struct TrainOptions {
  int steps = 500;
  int n_iter = 3;
  /// Called after every step with (step, loss before the update).
  std::function<void(int, double)> on_step;
};

struct TrainResult {
  MpnParameters params;
  std::vector<double> loss_trace;  // mean loss over the dataset before each update
};

/// Full-batch training, by fixed-step gradient descent or Adam depending on
/// cfg.optimizer. Pairs are evaluated in dataset order, so the result is
/// deterministic.
TrainResult train_loop(const std::vector<LabeledPair>& dataset, MpnParameters params, const TrainConfig& cfg,
                       const TrainOptions& options);

/// "step,loss" lines.
std::string format_loss_trace(const std::vector<double>& trace);

/// Fraction of labeled pairs (at least one positive endpoint) whose edge
/// score falls on the correct side of `threshold`.
double edge_accuracy(const std::vector<LabeledPair>& dataset, const MpnParameters& params, int n_iter,
                     double threshold = 0.5);

}  // namespace sparsetrack
