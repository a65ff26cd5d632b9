#include "sparsetrack/graph_builder.hpp"

#include "sparsetrack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>

namespace sparsetrack {

namespace {

double log_ratio(double num, double den) {
  if (num <= 0.0 && den <= 0.0) return 0.0;
  if (num <= 0.0) return -kLogRatioClamp;
  if (den <= 0.0) return kLogRatioClamp;
  return std::clamp(std::log(num / den), -kLogRatioClamp, kLogRatioClamp);
}

// Indices of the m best candidates under `better`, ties by ascending index.
template <typename Key>
void take_best(const std::vector<Detection>& candidates, int m, Key key, std::set<int>& out) {
  std::vector<int> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> keys(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) keys[i] = key(candidates[i]);
  const size_t take = std::min(order.size(), static_cast<size_t>(m));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](int a, int b) { return keys[a] != keys[b] ? keys[a] > keys[b] : a < b; });
  out.insert(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
}

SparseGraph connect(std::vector<T1Node> nodes_t1, const std::vector<Detection>& detections_t2, int m,
                    double position_scale) {
  auto encoder_input = [&](const Detection& a, const Detection& b) {
    EdgeRawFeatures f = raw_edge_features(a, b);
    f.dx /= position_scale;
    f.dy /= position_scale;
    return f;
  };
  SparseGraph g;
  g.nodes_t1 = std::move(nodes_t1);
  g.nodes_t2 = detections_t2;
  for (size_t i = 0; i < g.nodes_t1.size(); ++i) {
    const Detection& src = g.nodes_t1[i].detection;
    const NodeRef from{g.nodes_t1[i].missing ? NodeRef::Side::Missing : NodeRef::Side::T1, static_cast<int>(i)};
    for (int j : select_neighbors(src, g.nodes_t2, m)) {
      const NodeRef to{NodeRef::Side::T2, j};
      NodePair pair;
      pair.t1 = static_cast<int>(i);
      pair.t2 = j;
      pair.forward_edge = static_cast<int>(g.edges.size());
      g.edges.push_back({from, to, encoder_input(src, g.nodes_t2[j])});
      pair.backward_edge = static_cast<int>(g.edges.size());
      g.edges.push_back({to, from, encoder_input(g.nodes_t2[j], src)});
      g.pairs.push_back(pair);
    }
  }
  return g;
}

}  // namespace

std::vector<Detection> top_k(const std::vector<Detection>& detections, int k) {
  std::vector<int> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return detections[a].score > detections[b].score; });
  const size_t take = std::min(order.size(), static_cast<size_t>(std::max(k, 0)));
  std::vector<Detection> out;
  out.reserve(take);
  for (size_t i = 0; i < take; ++i) out.push_back(detections[order[i]]);
  return out;
}

std::vector<int> select_neighbors(const Detection& src, const std::vector<Detection>& candidates, int m) {
  std::set<int> chosen;
  take_best(candidates, m, [&](const Detection& d) { return -center_distance(src.box, d.box); }, chosen);
  take_best(candidates, m, [&](const Detection& d) { return cosine_similarity(src.embedding, d.embedding); },
            chosen);
  take_best(candidates, m, [&](const Detection& d) { return iou(src.box, d.box); }, chosen);
  return {chosen.begin(), chosen.end()};
}

EdgeRawFeatures raw_edge_features(const Detection& src, const Detection& dst) {
  EdgeRawFeatures f;
  f.dx = src.box.center_x() - dst.box.center_x();
  f.dy = src.box.center_y() - dst.box.center_y();
  f.log_w_ratio = log_ratio(src.box.width(), dst.box.width());
  f.log_h_ratio = log_ratio(src.box.height(), dst.box.height());
  f.iou = iou(src.box, dst.box);
  f.sim = cosine_similarity(src.embedding, dst.embedding);
  return f;
}

SparseGraph build_graph(const std::vector<Tracklet>& active, const std::vector<Tracklet>& missing,
                        const std::vector<Detection>& detections_t2, const TrackerConfig& cfg) {
  std::vector<T1Node> nodes;
  nodes.reserve(active.size() + missing.size());
  auto append = [&](const Tracklet& t, bool is_missing) {
    T1Node n;
    n.detection = t.last_detection;
    n.detection.embedding = t.smoothed_embedding;
    n.tracklet_id = t.id;
    n.missing = is_missing;
    nodes.push_back(std::move(n));
  };
  for (const auto& t : active) append(t, false);
  for (const auto& t : missing) append(t, true);
  return connect(std::move(nodes), detections_t2, cfg.edges_per_criterion, cfg.position_scale);
}

SparseGraph build_detection_graph(const std::vector<Detection>& detections_t1,
                                  const std::vector<Detection>& detections_t2, int edges_per_criterion,
                                  double position_scale) {
  if (!(position_scale > 0.0)) throw ConfigError("build_detection_graph: position_scale must be positive");
  std::vector<T1Node> nodes;
  nodes.reserve(detections_t1.size());
  for (const auto& d : detections_t1) nodes.push_back({d, std::nullopt, false});
  return connect(std::move(nodes), detections_t2, edges_per_criterion, position_scale);
}

void SparseGraph::validate() const {
  auto fail = [](const std::string& what) { throw DataError("invalid graph: " + what); };
  const int n1 = static_cast<int>(nodes_t1.size());
  const int n2 = static_cast<int>(nodes_t2.size());
  auto in_range = [&](const NodeRef& r) {
    return r.on_t2() ? (r.index >= 0 && r.index < n2) : (r.index >= 0 && r.index < n1);
  };
  std::set<std::pair<int, int>> seen;
  for (const auto& p : pairs) {
    if (p.t1 < 0 || p.t1 >= n1 || p.t2 < 0 || p.t2 >= n2) fail("pair index out of range");
    if (!seen.insert({p.t1, p.t2}).second) fail("duplicate pair");
    const int ne = static_cast<int>(edges.size());
    if (p.forward_edge < 0 || p.forward_edge >= ne || p.backward_edge < 0 || p.backward_edge >= ne) {
      fail("edge index out of range");
    }
    const auto& f = edges[p.forward_edge];
    const auto& b = edges[p.backward_edge];
    if (f.from.on_t2() || !f.to.on_t2() || f.from.index != p.t1 || f.to.index != p.t2) fail("bad forward edge");
    if (!b.from.on_t2() || b.to.on_t2() || b.from.index != p.t2 || b.to.index != p.t1) fail("bad backward edge");
  }
  if (edges.size() != 2 * pairs.size()) fail("edge count is not twice the pair count");
  for (const auto& e : edges) {
    if (!in_range(e.from) || !in_range(e.to)) fail("edge endpoint out of range");
    if (e.from.on_t2() == e.to.on_t2()) fail("edge does not cross the bipartition");
  }
}

}  // namespace sparsetrack
