#pragma once

#include "sparsetrack/graph_builder.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace sparsetrack {

/// Row-major score matrix; entries equal to kForbidden mark pairs that may
/// never be assigned.
struct ScoreMatrix {
  static constexpr double kForbidden = -std::numeric_limits<double>::infinity();

  int rows = 0;
  int cols = 0;
  std::vector<double> scores;

  ScoreMatrix() = default;
  ScoreMatrix(int r, int c, double fill = kForbidden) : rows(r), cols(c), scores(static_cast<size_t>(r) * c, fill) {}

  double& at(int r, int c) { return scores[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return scores[static_cast<size_t>(r) * cols + c]; }
  bool forbidden(int r, int c) const { return is_forbidden(at(r, c)); }
  static bool is_forbidden(double v) { return std::isinf(v) && v < 0.0; }
};

struct Match {
  int row = 0;
  int col = 0;
  friend bool operator==(const Match&, const Match&) = default;
};

/// Maximum-cardinality matching avoiding forbidden entries; among those,
/// one of maximum total score. Rectangular input is padded internally.
std::vector<Match> hungarian_max(const ScoreMatrix& matrix);

/// Entry (t1, t2) holds the pair's edge score when the pair was materialized.
ScoreMatrix build_score_matrix(const SparseGraph& graph, const std::vector<double>& edge_scores);

struct ScoredMatch {
  int row = 0;
  int col = 0;
  double score = 0.0;
};

struct GateResult {
  std::vector<ScoredMatch> accepted;
  std::vector<int> unmatched_rows;  // ascending
  std::vector<int> unmatched_cols;  // ascending
};

/// Keeps matches scoring at least tau_edge; every other row/col is unmatched.
GateResult gate_matches(const std::vector<Match>& matches, const ScoreMatrix& matrix, double tau_edge);

}  // namespace sparsetrack
