#include "sparsetrack/evaluate.hpp"

#include "sparsetrack/association.hpp"
#include "sparsetrack/geometry.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace sparsetrack {

std::string VisibilityBucket::label() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), hi >= 1.0 ? "[%.1f,%.1f]" : "[%.1f,%.1f)", lo, hi);
  return buf;
}

namespace {

int bucket_of(double visibility) {
  if (visibility < 0.3) return 0;
  if (visibility < 0.6) return 1;
  return 2;
}

void finish(EvalReport& r) {
  r.mota = r.total_gt == 0 ? 0.0 : 1.0 - static_cast<double>(r.fp + r.fn + r.ids) / static_cast<double>(r.total_gt);
  const long denom = r.total_gt + r.total_hyp;
  r.idf1 = denom == 0 ? 0.0 : 2.0 * static_cast<double>(r.idtp) / static_cast<double>(denom);
  r.mt = r.gt_tracks == 0 ? 0.0 : static_cast<double>(r.mt_tracks) / static_cast<double>(r.gt_tracks);
  r.ml = r.gt_tracks == 0 ? 0.0 : static_cast<double>(r.ml_tracks) / static_cast<double>(r.gt_tracks);
}

}  // namespace

EvalReport evaluate(const ResultsByFrame& results, const GtByFrame& gt, double iou_match_threshold) {
  long gt_boxes = 0;
  for (const auto& [frame, list] : gt) gt_boxes += static_cast<long>(list.size());
  if (gt.empty() || gt_boxes == 0) throw DataError("evaluate: ground truth is empty");
  for (const auto& [frame, list] : results) {
    if (!list.empty() && !gt.contains(frame)) {
      throw DataError("evaluate: results contain frame " + std::to_string(frame) + " which the ground truth lacks");
    }
  }

  EvalReport r;
  std::map<int64_t, int64_t> last_match;   // gt id -> hyp id of the previous frame it was matched in
  std::map<int64_t, int64_t> prev_frame;   // gt id -> hyp id matched in the immediately preceding frame
  std::map<int64_t, long> gt_present, gt_covered;
  std::map<std::pair<int64_t, int64_t>, long> overlap;  // (gt id, hyp id) -> frames with IoU >= threshold
  static const std::vector<TrackOutput> kNone;

  for (const auto& [frame, gts] : gt) {
    const auto it = results.find(frame);
    const std::vector<TrackOutput>& hyps = it == results.end() ? kNone : it->second;
    r.total_gt += static_cast<long>(gts.size());
    r.total_hyp += static_cast<long>(hyps.size());

    for (const auto& g : gts) {
      gt_present[g.id] += 1;
      for (const auto& h : hyps) {
        if (iou(g.box, h.box) >= iou_match_threshold) overlap[{g.id, h.id}] += 1;
      }
    }

    std::vector<int> gt_to_hyp(gts.size(), -1);
    std::vector<char> hyp_used(hyps.size(), 0);
    for (size_t i = 0; i < gts.size(); ++i) {
      const auto prev = prev_frame.find(gts[i].id);
      if (prev == prev_frame.end()) continue;
      for (size_t j = 0; j < hyps.size(); ++j) {
        if (hyp_used[j] || hyps[j].id != prev->second) continue;
        if (iou(gts[i].box, hyps[j].box) >= iou_match_threshold) {
          gt_to_hyp[i] = static_cast<int>(j);
          hyp_used[j] = 1;
        }
        break;
      }
    }

    std::vector<int> free_gt, free_hyp;
    for (size_t i = 0; i < gts.size(); ++i) {
      if (gt_to_hyp[i] < 0) free_gt.push_back(static_cast<int>(i));
    }
    for (size_t j = 0; j < hyps.size(); ++j) {
      if (!hyp_used[j]) free_hyp.push_back(static_cast<int>(j));
    }
    if (!free_gt.empty() && !free_hyp.empty()) {
      ScoreMatrix m(static_cast<int>(free_gt.size()), static_cast<int>(free_hyp.size()));
      for (size_t a = 0; a < free_gt.size(); ++a) {
        for (size_t b = 0; b < free_hyp.size(); ++b) {
          const double v = iou(gts[free_gt[a]].box, hyps[free_hyp[b]].box);
          if (v >= iou_match_threshold) m.at(static_cast<int>(a), static_cast<int>(b)) = v;
        }
      }
      for (const auto& match : hungarian_max(m)) gt_to_hyp[free_gt[match.row]] = free_hyp[match.col];
    }

    std::map<int64_t, int64_t> current;
    for (size_t i = 0; i < gts.size(); ++i) {
      const GtObject& g = gts[i];
      auto& bucket = r.recall_by_visibility[bucket_of(g.visibility)];
      bucket.gt += 1;
      if (gt_to_hyp[i] < 0) {
        r.fn += 1;
        continue;
      }
      const int64_t hyp_id = hyps[gt_to_hyp[i]].id;
      r.matches += 1;
      bucket.matched += 1;
      gt_covered[g.id] += 1;
      const auto last = last_match.find(g.id);
      if (last != last_match.end() && last->second != hyp_id) r.ids += 1;
      last_match[g.id] = hyp_id;
      current[g.id] = hyp_id;
    }
    r.fp += static_cast<long>(hyps.size()) - static_cast<long>(current.size());
    prev_frame = std::move(current);
  }

  // Identity bijection maximizing the number of co-located frames.
  std::vector<int64_t> gt_ids, hyp_ids;
  for (const auto& [id, n] : gt_present) gt_ids.push_back(id);
  std::set<int64_t> hyp_set;
  for (const auto& [frame, list] : results) {
    if (gt.contains(frame)) {
      for (const auto& h : list) hyp_set.insert(h.id);
    }
  }
  hyp_ids.assign(hyp_set.begin(), hyp_set.end());
  if (!hyp_ids.empty()) {
    // Every entry allowed, so maximum cardinality is free and the solver
    // returns a maximum-overlap bijection.
    ScoreMatrix m(static_cast<int>(gt_ids.size()), static_cast<int>(hyp_ids.size()), 0.0);
    for (size_t a = 0; a < gt_ids.size(); ++a) {
      for (size_t b = 0; b < hyp_ids.size(); ++b) {
        const auto o = overlap.find({gt_ids[a], hyp_ids[b]});
        if (o != overlap.end()) m.at(static_cast<int>(a), static_cast<int>(b)) = static_cast<double>(o->second);
      }
    }
    for (const auto& match : hungarian_max(m)) r.idtp += static_cast<long>(m.at(match.row, match.col));
  }

  for (const auto& [id, present] : gt_present) {
    const double ratio = static_cast<double>(gt_covered[id]) / static_cast<double>(present);
    r.gt_tracks += 1;
    if (ratio >= 0.8) r.mt_tracks += 1;
    if (ratio <= 0.2) r.ml_tracks += 1;
  }
  finish(r);
  return r;
}

EvalReport combine_reports(const std::vector<EvalReport>& reports) {
  EvalReport r;
  for (const auto& x : reports) {
    r.fp += x.fp;
    r.fn += x.fn;
    r.ids += x.ids;
    r.total_gt += x.total_gt;
    r.total_hyp += x.total_hyp;
    r.matches += x.matches;
    r.idtp += x.idtp;
    r.gt_tracks += x.gt_tracks;
    r.mt_tracks += x.mt_tracks;
    r.ml_tracks += x.ml_tracks;
    for (size_t b = 0; b < r.recall_by_visibility.size(); ++b) {
      r.recall_by_visibility[b].gt += x.recall_by_visibility[b].gt;
      r.recall_by_visibility[b].matched += x.recall_by_visibility[b].matched;
    }
  }
  finish(r);
  return r;
}

std::string format_report_table(const EvalReport& r) {
  char buf[256];
  std::ostringstream out;
  std::snprintf(buf, sizeof(buf), "%8s %8s %8s %8s %6s %8s %6s %6s\n", "MOTA", "IDF1", "FP", "FN", "IDS", "GT", "MT",
                "ML");
  out << buf;
  std::snprintf(buf, sizeof(buf), "%8.3f %8.3f %8ld %8ld %6ld %8ld %6.3f %6.3f\n", r.mota, r.idf1, r.fp, r.fn, r.ids,
                r.total_gt, r.mt, r.ml);
  out << buf;
  out << "recall by visibility:\n";
  for (const auto& b : r.recall_by_visibility) {
    std::snprintf(buf, sizeof(buf), "  %-10s %6.3f  (%ld gt)\n", b.label().c_str(), b.recall(), b.gt);
    out << buf;
  }
  return out.str();
}

std::string format_report_kv(const EvalReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "MOTA=%.3f\nIDF1=%.3f\nFP=%ld\nFN=%ld\nIDS=%ld\nGT=%ld\nMT=%.3f\nML=%.3f\n"
                "recall_vis_0.0_0.3=%.3f\nrecall_vis_0.3_0.6=%.3f\nrecall_vis_0.6_1.0=%.3f\n",
                r.mota, r.idf1, r.fp, r.fn, r.ids, r.total_gt, r.mt, r.ml, r.recall_by_visibility[0].recall(),
                r.recall_by_visibility[1].recall(), r.recall_by_visibility[2].recall());
  return buf;
}

}  // namespace sparsetrack
