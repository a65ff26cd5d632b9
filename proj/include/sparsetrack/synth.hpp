#pragma once

#include "sparsetrack/mot_io.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace sparsetrack {

/// Frame indices are 0-based here; end_frame is exclusive.
struct OcclusionEvent {
  int identity = 0;
  int start_frame = 0;
  int end_frame = 0;
  double score_during = 0.0;  // 0 drops the detection entirely
  double visibility_during = 0.0;
};

struct IdentityMotion {
  BBox initial;
  double vx = 0.0;  // pixels per frame
  double vy = 0.0;
};

struct SequenceSpec {
  int n_frames = 200;
  int n_identities = 10;
  double fps = 30.0;
  double image_w = 1920.0;
  double image_h = 1080.0;
  std::vector<OcclusionEvent> occlusion_events;
  std::vector<IdentityMotion> motion;  // empty: drawn from the seed
  double velocity_max = 3.0;
  double box_noise_std = 1.5;
  int embedding_dim = 16;
  double embedding_noise_std = 0.1;
  double score_min = 0.6;
  double score_max = 0.95;
  // Background detections: random boxes with unrelated embeddings.
  int clutter_per_frame = 0;
  double clutter_score_max = 0.3;
  // Poorly localized low-score duplicates of real objects, drawn per object
  // and frame whether or not the object itself is detected. The box is the
  // object's box shifted sideways by a fraction of its width.
  double false_positive_rate = 0.0;
  double fp_score_min = 0.25;
  double fp_score_max = 0.35;
  double fp_similarity = 0.8;
  double fp_shift_min = 0.4;
  double fp_shift_max = 0.7;

  void validate() const;
};

/// Detections and GT keyed by 1-based frame number (frame index + 1). Every
/// frame of the sequence has an entry, possibly empty.
struct SyntheticSequence {
  DetectionsByFrame detections;
  GtByFrame gt;
};

SyntheticSequence synth_generate(const SequenceSpec& spec, uint64_t seed);

}  // namespace sparsetrack
