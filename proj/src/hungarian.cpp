#include "sparsetrack/association.hpp"

#include <algorithm>

namespace sparsetrack {

// Kuhn-Munkres with row/column potentials on an n x n cost matrix, O(n^3).
// Scores are mapped to costs max_score - s in [0, range]; forbidden and
// padding cells cost more than any n allowed cells combined, so the
// minimizer first uses as few of them as possible (maximum cardinality) and
// then minimizes cost (maximum score).
std::vector<Match> hungarian_max(const ScoreMatrix& matrix) {
  const int rows = matrix.rows;
  const int cols = matrix.cols;
  const int n = std::max(rows, cols);
  if (n == 0) return {};

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double s : matrix.scores) {
    if (ScoreMatrix::is_forbidden(s)) continue;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  if (lo > hi) return {};  // everything forbidden
  const double range = hi - lo;
  const double blocked = static_cast<double>(n) * (range + 1.0) + 1.0;

  std::vector<double> cost(static_cast<size_t>(n) * n, blocked);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!matrix.forbidden(r, c)) cost[static_cast<size_t>(r) * n + c] = hi - matrix.at(r, c);
    }
  }

  // 1-based arrays; column 0 is a virtual start.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> owner(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    owner[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = owner[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[static_cast<size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const int j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<Match> out;
  for (int j = 1; j <= n; ++j) {
    const int r = owner[j] - 1;
    const int c = j - 1;
    if (r < rows && c < cols && !matrix.forbidden(r, c)) out.push_back({r, c});
  }
  std::sort(out.begin(), out.end(), [](const Match& a, const Match& b) { return a.row < b.row; });
  return out;
}

}  // namespace sparsetrack
