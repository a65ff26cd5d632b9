#include "sparsetrack/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace sparsetrack {

double iou(const BBox& a, const BBox& b) {
  const double inter_w = std::max(0.0, std::min(a.x_right, b.x_right) - std::max(a.x_left, b.x_left));
  const double inter_h = std::max(0.0, std::min(a.y_bottom, b.y_bottom) - std::max(a.y_top, b.y_top));
  const double inter = inter_w * inter_h;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double cosine_similarity(const Embedding& u, const Embedding& v) {
  if (u.size() != v.size()) throw ConfigError("cosine_similarity: dimension mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

double center_distance(const BBox& a, const BBox& b) {
  return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
}

}  // namespace sparsetrack
