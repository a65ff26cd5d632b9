#pragma once

#include "sparsetrack/types.hpp"

namespace sparsetrack {

/// Intersection over union; 0 when the union has zero area.
double iou(const BBox& a, const BBox& b);

/// Cosine similarity clamped to [-1, 1]; 0 when either vector has zero norm.
double cosine_similarity(const Embedding& u, const Embedding& v);

/// Euclidean distance between box centers.
double center_distance(const BBox& a, const BBox& b);

}  // namespace sparsetrack
