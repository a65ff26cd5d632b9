#include "sparsetrack/pipeline.hpp"

namespace sparsetrack {

FrameResult track_frame(TrackerState& state, int64_t frame, const std::vector<Detection>& detections,
                        const MpnParameters& params, const TrackerConfig& cfg) {
  for (const auto& d : detections) {
    if (d.embedding.size() != params.d_node) {
      throw ConfigError("track_frame: embedding dimension " + std::to_string(d.embedding.size()) +
                        " does not match d_node " + std::to_string(params.d_node));
    }
  }
  const std::vector<Detection> candidates = top_k(detections, cfg.top_k);
  const SparseGraph graph = build_graph(state.active, state.missing, candidates, cfg);
  const MpnOutput scores = forward(graph, params, cfg.n_iter);
  const ScoreMatrix matrix = build_score_matrix(graph, scores.edge_scores);
  const GateResult gated = gate_matches(hungarian_max(matrix), matrix, cfg.tau_edge);
  return step(state, frame, graph, scores, gated, cfg);
}

std::vector<FrameResult> run_tracker(const DetectionsByFrame& detections, const MpnParameters& params,
                                     const TrackerConfig& cfg) {
  cfg.validate();
  params.validate_shapes();
  std::vector<FrameResult> out;
  if (detections.empty()) return out;
  TrackerState state;
  static const std::vector<Detection> kEmpty;
  const int64_t first = detections.begin()->first;
  const int64_t last = detections.rbegin()->first;
  for (int64_t frame = first; frame <= last; ++frame) {
    const auto it = detections.find(frame);
    out.push_back(track_frame(state, frame, it == detections.end() ? kEmpty : it->second, params, cfg));
  }
  return out;
}

}  // namespace sparsetrack
