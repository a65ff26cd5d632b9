#include "sparsetrack/track_manager.hpp"

#include <algorithm>

namespace sparsetrack {

Embedding adaptive_smooth(const Embedding& emb_trk, double s_t1, const Embedding& emb_det, double s_t2) {
  if (emb_trk.size() != emb_det.size()) throw ConfigError("adaptive_smooth: dimension mismatch");
  const double total = s_t1 + s_t2;
  if (total <= 0.0) return emb_trk;
  return emb_trk * (s_t1 / total) + emb_det * (s_t2 / total);
}

FrameResult step(TrackerState& state, int64_t frame, const SparseGraph& graph, const MpnOutput& scores,
                 const GateResult& gated, const TrackerConfig& cfg) {
  const size_t n_active = state.active.size();
  if (graph.nodes_t1.size() != n_active + state.missing.size()) {
    throw ConfigError("track_manager: graph t1 nodes do not correspond to the tracker state");
  }
  if (scores.node_scores_t2.size() != graph.nodes_t2.size()) {
    throw ConfigError("track_manager: node scores do not cover the t2 nodes");
  }

  FrameResult result;
  result.frame = frame;
  std::vector<char> row_continued(graph.nodes_t1.size(), 0);
  std::vector<char> col_consumed(graph.nodes_t2.size(), 0);
  std::vector<Tracklet> next_active;

  auto tracklet_at = [&](int row) -> Tracklet& {
    return static_cast<size_t>(row) < n_active ? state.active[row] : state.missing[row - n_active];
  };

  for (const auto& m : gated.accepted) {
    const Detection& det = graph.nodes_t2[m.col];
    bool recovered = false;
    col_consumed[m.col] = 1;  // a rejected low-score detection is discarded, never re-seeded
    if (det.score < cfg.tau_init) {
      if (!cfg.recovery) continue;
      if (cfg.node_gate && scores.node_scores_t2[m.col] < cfg.tau_node) {
        ++result.events.rejected_recoveries;
        continue;
      }
      recovered = true;
      ++result.events.recovered;
    }
    row_continued[m.row] = 1;
    Tracklet t = tracklet_at(m.row);
    t.smoothed_embedding = adaptive_smooth(t.smoothed_embedding, t.last_score, det.embedding, det.score);
    t.last_detection = det;
    t.last_score = det.score;
    t.length += 1;
    t.frames_missing = 0;
    result.outputs.push_back({t.id, det.box, det.score, recovered});
    next_active.push_back(std::move(t));
  }

  std::vector<Tracklet> next_missing;
  for (size_t r = 0; r < n_active; ++r) {
    if (row_continued[r]) continue;
    Tracklet t = state.active[r];
    if (t.length >= cfg.age_min_frames && cfg.age_max_frames >= 1) {
      t.frames_missing = 1;
      next_missing.push_back(std::move(t));
      ++result.events.moved_to_missing;
    } else {
      ++result.events.terminated;
    }
  }
  for (size_t k = 0; k < state.missing.size(); ++k) {
    if (row_continued[n_active + k]) continue;
    Tracklet t = state.missing[k];
    t.frames_missing += 1;
    if (t.frames_missing > cfg.age_max_frames) {
      ++result.events.terminated;
    } else {
      next_missing.push_back(std::move(t));
    }
  }

  for (size_t j = 0; j < graph.nodes_t2.size(); ++j) {
    const Detection& det = graph.nodes_t2[j];
    if (col_consumed[j] || det.score < cfg.tau_init) continue;
    Tracklet t;
    t.id = state.next_id++;
    t.last_detection = det;
    t.smoothed_embedding = det.embedding;
    t.length = 1;
    t.frames_missing = 0;
    t.last_score = det.score;
    result.outputs.push_back({t.id, det.box, det.score, false});
    next_active.push_back(std::move(t));
    ++result.events.new_tracks;
  }

  state.active = std::move(next_active);
  state.missing = std::move(next_missing);
  state.frame_index += 1;
  std::sort(result.outputs.begin(), result.outputs.end(),
            [](const TrackOutput& a, const TrackOutput& b) { return a.id < b.id; });
  return result;
}

}  // namespace sparsetrack
