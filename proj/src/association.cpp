#include "sparsetrack/association.hpp"

namespace sparsetrack {

ScoreMatrix build_score_matrix(const SparseGraph& graph, const std::vector<double>& edge_scores) {
  if (edge_scores.size() != graph.pairs.size()) {
    throw ConfigError("build_score_matrix: " + std::to_string(edge_scores.size()) + " scores for " +
                      std::to_string(graph.pairs.size()) + " pairs");
  }
  ScoreMatrix m(static_cast<int>(graph.nodes_t1.size()), static_cast<int>(graph.nodes_t2.size()));
  for (size_t p = 0; p < graph.pairs.size(); ++p) m.at(graph.pairs[p].t1, graph.pairs[p].t2) = edge_scores[p];
  return m;
}

GateResult gate_matches(const std::vector<Match>& matches, const ScoreMatrix& matrix, double tau_edge) {
  GateResult out;
  std::vector<char> row_used(static_cast<size_t>(matrix.rows), 0);
  std::vector<char> col_used(static_cast<size_t>(matrix.cols), 0);
  for (const auto& m : matches) {
    const double s = matrix.at(m.row, m.col);
    if (ScoreMatrix::is_forbidden(s) || s < tau_edge) continue;
    out.accepted.push_back({m.row, m.col, s});
    row_used[m.row] = 1;
    col_used[m.col] = 1;
  }
  for (int r = 0; r < matrix.rows; ++r) {
    if (!row_used[r]) out.unmatched_rows.push_back(r);
  }
  for (int c = 0; c < matrix.cols; ++c) {
    if (!col_used[c]) out.unmatched_cols.push_back(c);
  }
  return out;
}

}  // namespace sparsetrack
