#pragma once

#include "sparsetrack/types.hpp"

#include <array>
#include <optional>
#include <vector>

namespace sparsetrack {

/// Which node list an edge endpoint refers to. T1 and Missing both index
/// into SparseGraph::nodes_t1 (missing tracklets are appended after the
/// active ones); T2 indexes SparseGraph::nodes_t2.
struct NodeRef {
  enum class Side { T1, T2, Missing };
  Side side = Side::T1;
  int index = 0;

  bool on_t2() const { return side == Side::T2; }
  friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

/// Direction-aware pairwise relation of two detections, src -> dst.
struct EdgeRawFeatures {
  double dx = 0.0;
  double dy = 0.0;
  double log_w_ratio = 0.0;
  double log_h_ratio = 0.0;
  double iou = 0.0;
  double sim = 0.0;

  std::array<double, 6> as_array() const { return {dx, dy, log_w_ratio, log_h_ratio, iou, sim}; }
};

struct T1Node {
  Detection detection;                  // box of the last detection, smoothed embedding
  std::optional<int64_t> tracklet_id;   // unset for plain detections (training pairs)
  bool missing = false;
};

struct DirectedEdge {
  NodeRef from;
  NodeRef to;
  EdgeRawFeatures raw;
};

/// One selected (t1, t2) pair and the indices of its two directed edges.
struct NodePair {
  int t1 = 0;
  int t2 = 0;
  int forward_edge = 0;   // t1 -> t2
  int backward_edge = 0;  // t2 -> t1
};

struct SparseGraph {
  std::vector<T1Node> nodes_t1;
  std::vector<Detection> nodes_t2;
  std::vector<DirectedEdge> edges;
  std::vector<NodePair> pairs;  // ordered by t1, then ascending t2

  /// Checks index bounds, bidirectionality and absence of duplicates.
  /// Throws DataError on violation.
  void validate() const;
};

/// Magnitude substituted for log size ratios involving a zero extent.
inline constexpr double kLogRatioClamp = 20.0;

/// The min(k, n) highest-scored detections, descending score, ties by input order.
std::vector<Detection> top_k(const std::vector<Detection>& detections, int k);

/// Union of the m nearest (center distance), m most similar (cosine) and
/// m highest-IoU candidates. Returned indices are ascending.
std::vector<int> select_neighbors(const Detection& src, const std::vector<Detection>& candidates, int m);

EdgeRawFeatures raw_edge_features(const Detection& src, const Detection& dst);

/// Builds the sparse bipartite graph for one frame step. t1 nodes are the
/// active tracklets followed by the missing ones; each uses its last box and
/// its smoothed embedding. Stored edge features are raw_edge_features with
/// dx and dy divided by cfg.position_scale.
SparseGraph build_graph(const std::vector<Tracklet>& active, const std::vector<Tracklet>& missing,
                        const std::vector<Detection>& detections_t2, const TrackerConfig& cfg);

/// Same construction with plain detections on the t1 side (training pairs).
SparseGraph build_detection_graph(const std::vector<Detection>& detections_t1,
                                  const std::vector<Detection>& detections_t2, int edges_per_criterion,
                                  double position_scale = TrackerConfig{}.position_scale);

}  // namespace sparsetrack
