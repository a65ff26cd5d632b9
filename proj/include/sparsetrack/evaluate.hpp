#pragma once

#include "sparsetrack/mot_io.hpp"

#include <array>
#include <string>
#include <vector>

namespace sparsetrack {

struct VisibilityBucket {
  double lo = 0.0;
  double hi = 0.0;  // exclusive, except for the last bucket
  long gt = 0;
  long matched = 0;

  double recall() const { return gt == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(gt); }
  std::string label() const;
};

struct EvalReport {
  double mota = 0.0;
  double idf1 = 0.0;
  long fp = 0;
  long fn = 0;
  long ids = 0;
  double mt = 0.0;
  double ml = 0.0;
  std::array<VisibilityBucket, 3> recall_by_visibility{
      VisibilityBucket{0.0, 0.3}, VisibilityBucket{0.3, 0.6}, VisibilityBucket{0.6, 1.0}};

  // Raw counts, kept so reports of several sequences can be pooled.
  long total_gt = 0;
  long total_hyp = 0;
  long matches = 0;
  long idtp = 0;
  long gt_tracks = 0;
  long mt_tracks = 0;
  long ml_tracks = 0;

  double recall() const { return total_gt == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(total_gt); }
};

/// CLEAR-MOT counts with the continuity rule, IDF1 from the optimal global
/// identity bijection, MT/ML coverage and recall per visibility bucket.
/// Throws DataError when GT is empty or results name a frame GT lacks.
EvalReport evaluate(const ResultsByFrame& results, const GtByFrame& gt, double iou_match_threshold = 0.5);

/// Pools the raw counts of several reports and recomputes the ratios.
EvalReport combine_reports(const std::vector<EvalReport>& reports);

std::string format_report_table(const EvalReport& report);
std::string format_report_kv(const EvalReport& report);

}  // namespace sparsetrack
