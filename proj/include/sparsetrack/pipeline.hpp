#pragma once

#include "sparsetrack/mot_io.hpp"
#include "sparsetrack/mpn.hpp"
#include "sparsetrack/track_manager.hpp"

#include <vector>

namespace sparsetrack {

/// One frame: top-K, graph, message passing, assignment, gating, lifecycle.
FrameResult track_frame(TrackerState& state, int64_t frame, const std::vector<Detection>& detections,
                        const MpnParameters& params, const TrackerConfig& cfg);

/// Runs every frame from the first to the last key of `detections`, in
/// order; frames without an entry are processed as empty.
std::vector<FrameResult> run_tracker(const DetectionsByFrame& detections, const MpnParameters& params,
                                     const TrackerConfig& cfg);

}  // namespace sparsetrack
