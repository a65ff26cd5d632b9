#pragma once

#include "sparsetrack/association.hpp"
#include "sparsetrack/graph_builder.hpp"
#include "sparsetrack/mpn.hpp"
#include "sparsetrack/types.hpp"

#include <vector>

namespace sparsetrack {

struct TrackerState {
  std::vector<Tracklet> active;
  std::vector<Tracklet> missing;  // 0 < frames_missing <= age_max_frames
  int64_t next_id = 1;
  int64_t frame_index = 0;  // frames processed so far
};

struct TrackOutput {
  int64_t id = 0;
  BBox box;
  double score = 0.0;
  bool recovered = false;
};

struct FrameEvents {
  int new_tracks = 0;
  int recovered = 0;
  int rejected_recoveries = 0;
  int moved_to_missing = 0;
  int terminated = 0;
};

struct FrameResult {
  int64_t frame = 0;
  std::vector<TrackOutput> outputs;  // ascending id
  FrameEvents events;
};

/// Score-weighted blend of a tracklet embedding with its matched detection's
/// embedding. Returns emb_trk unchanged when both scores are zero.
Embedding adaptive_smooth(const Embedding& emb_trk, double s_t1, const Embedding& emb_det, double s_t2);

/// Advances the tracker by one frame. Rows of the gated matches index
/// graph.nodes_t1 (state.active followed by state.missing, as produced by
/// build_graph); columns index graph.nodes_t2.
FrameResult step(TrackerState& state, int64_t frame, const SparseGraph& graph, const MpnOutput& scores,
                 const GateResult& gated, const TrackerConfig& cfg);

}  // namespace sparsetrack
