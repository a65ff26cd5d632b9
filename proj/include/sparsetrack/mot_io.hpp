#pragma once

// MOTChallenge-style text formats.
//   detections: frame,id,bb_left,bb_top,bb_width,bb_height,score[,...]
//   ground truth: frame,id,bb_left,bb_top,bb_width,bb_height,flag,class,visibility
//   results: frame,id,bb_left,bb_top,bb_width,bb_height,score,-1,-1,-1
//   events: frame,id,recovered
//   embedding sidecar: one row per detection line, comma-separated reals

#include "sparsetrack/track_manager.hpp"
#include "sparsetrack/training.hpp"
#include "sparsetrack/types.hpp"

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sparsetrack {

using DetectionsByFrame = std::map<int64_t, std::vector<Detection>>;
using GtByFrame = std::map<int64_t, std::vector<GtObject>>;
using ResultsByFrame = std::map<int64_t, std::vector<TrackOutput>>;

struct LoadedDetections {
  DetectionsByFrame frames;
  std::vector<std::string> warnings;
};

/// Reads a detection file and an optional embedding sidecar. Without a
/// sidecar every embedding is a zero vector of dimension `embedding_dim`.
LoadedDetections load_mot(const std::string& det_path, const std::optional<std::string>& emb_path,
                          int embedding_dim);
LoadedDetections parse_mot(std::istream& det, std::istream* emb, int embedding_dim);

GtByFrame load_gt(const std::string& path);
GtByFrame parse_gt(std::istream& in);

ResultsByFrame load_results(const std::string& path);
ResultsByFrame parse_results(std::istream& in);

/// Frames ascending, ids ascending within a frame.
std::string format_results(const std::vector<FrameResult>& tracks);
std::string format_events(const std::vector<FrameResult>& tracks);
void write_results(const std::vector<FrameResult>& tracks, const std::string& path);
void write_events(const std::vector<FrameResult>& tracks, const std::string& path);

std::string format_detections(const DetectionsByFrame& dets);
std::string format_embeddings(const DetectionsByFrame& dets);
std::string format_gt(const GtByFrame& gt);

void write_text_file(const std::string& path, const std::string& text);

ResultsByFrame results_by_frame(const std::vector<FrameResult>& tracks);

}  // namespace sparsetrack
