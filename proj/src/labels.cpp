#include "sparsetrack/association.hpp"
#include "sparsetrack/geometry.hpp"
#include "sparsetrack/training.hpp"

namespace sparsetrack {

NodeLabels assign_pseudo_labels(const std::vector<Detection>& detections, const std::vector<GtObject>& gts,
                                double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw ConfigError("assign_pseudo_labels: iou_threshold must lie in (0,1]");
  }
  NodeLabels labels;
  labels.positive.assign(detections.size(), 0);
  labels.gt_id.assign(detections.size(), std::nullopt);
  if (detections.empty() || gts.empty()) return labels;

  ScoreMatrix m(static_cast<int>(detections.size()), static_cast<int>(gts.size()), 0.0);
  for (size_t i = 0; i < detections.size(); ++i) {
    for (size_t g = 0; g < gts.size(); ++g) m.at(static_cast<int>(i), static_cast<int>(g)) = iou(detections[i].box, gts[g].box);
  }
  for (const auto& match : hungarian_max(m)) {
    if (m.at(match.row, match.col) < iou_threshold) continue;
    labels.positive[match.row] = 1;
    labels.gt_id[match.row] = gts[match.col].id;
  }
  return labels;
}

EdgeLabels assign_edge_labels(const NodeLabels& labels_t1, const NodeLabels& labels_t2, const SparseGraph& graph) {
  if (labels_t1.positive.size() != graph.nodes_t1.size() || labels_t2.positive.size() != graph.nodes_t2.size()) {
    throw ConfigError("assign_edge_labels: node labels do not match the graph");
  }
  EdgeLabels out;
  out.label.reserve(graph.pairs.size());
  out.has_positive_end.reserve(graph.pairs.size());
  for (const auto& p : graph.pairs) {
    const bool pos1 = labels_t1.positive[p.t1] != 0;
    const bool pos2 = labels_t2.positive[p.t2] != 0;
    out.has_positive_end.push_back(pos1 || pos2 ? 1 : 0);
    out.label.push_back(pos1 && pos2 && labels_t1.gt_id[p.t1] == labels_t2.gt_id[p.t2] ? 1 : 0);
  }
  return out;
}

LabeledPair make_labeled_pair(const std::vector<Detection>& detections_t1, const std::vector<GtObject>& gt_t1,
                              const std::vector<Detection>& detections_t2, const std::vector<GtObject>& gt_t2,
                              int edges_per_criterion, double iou_threshold, double position_scale) {
  LabeledPair pair;
  pair.graph = build_detection_graph(detections_t1, detections_t2, edges_per_criterion, position_scale);
  pair.labels_t1 = assign_pseudo_labels(detections_t1, gt_t1, iou_threshold);
  pair.labels_t2 = assign_pseudo_labels(detections_t2, gt_t2, iou_threshold);
  pair.edge_labels = assign_edge_labels(pair.labels_t1, pair.labels_t2, pair.graph);
  return pair;
}

}  // namespace sparsetrack
