#include "sparsetrack/mot_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sparsetrack {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

double to_double(const std::string& s, const std::string& where) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    while (used < s.size() && (s[used] == ' ' || s[used] == '\r' || s[used] == '\t')) ++used;
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(where + ": not a number: '" + s + "'");
  }
}

int64_t to_int(const std::string& s, const std::string& where) {
  const double v = to_double(s, where);
  if (v != std::floor(v)) throw DataError(where + ": not an integer: '" + s + "'");
  return static_cast<int64_t>(v);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  return in;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

}  // namespace

LoadedDetections parse_mot(std::istream& det, std::istream* emb, int embedding_dim) {
  LoadedDetections out;
  std::vector<std::vector<double>> emb_rows;
  if (emb != nullptr) {
    std::string line;
    int line_no = 0;
    while (std::getline(*emb, line)) {
      ++line_no;
      if (blank(line)) continue;
      std::vector<double> row;
      for (const auto& f : split_csv(line)) row.push_back(to_double(f, "embedding line " + std::to_string(line_no)));
      if (static_cast<int>(row.size()) != embedding_dim) {
        throw DataError("embedding line " + std::to_string(line_no) + ": expected " + std::to_string(embedding_dim) +
                        " values, found " + std::to_string(row.size()));
      }
      emb_rows.push_back(std::move(row));
    }
  }

  std::string line;
  int line_no = 0;
  size_t det_count = 0;
  while (std::getline(det, line)) {
    ++line_no;
    if (blank(line)) continue;
    const std::string where = "detection line " + std::to_string(line_no);
    const auto f = split_csv(line);
    if (f.size() < 7) throw DataError(where + ": expected at least 7 fields, found " + std::to_string(f.size()));
    Detection d;
    d.frame = to_int(f[0], where);
    const double width = to_double(f[4], where);
    const double height = to_double(f[5], where);
    if (width < 0.0 || height < 0.0) throw DataError(where + ": negative box size");
    d.box = BBox::from_ltwh(to_double(f[2], where), to_double(f[3], where), width, height);
    d.score = to_double(f[6], where);
    if (d.score < 0.0 || d.score > 1.0) throw DataError(where + ": score outside [0,1]");
    d.embedding = Eigen::VectorXd::Zero(embedding_dim);
    if (emb != nullptr && det_count < emb_rows.size()) {
      d.embedding = Eigen::Map<const Eigen::VectorXd>(emb_rows[det_count].data(), embedding_dim);
    }
    ++det_count;
    out.frames[d.frame].push_back(std::move(d));
  }
  if (emb != nullptr && emb_rows.size() != det_count) {
    throw DataError("embedding sidecar has " + std::to_string(emb_rows.size()) + " rows but detection file has " +
                    std::to_string(det_count) + " detections");
  }
  if (emb == nullptr && det_count > 0) {
    out.warnings.push_back("no embedding sidecar; embeddings default to zero vectors");
  }
  return out;
}

LoadedDetections load_mot(const std::string& det_path, const std::optional<std::string>& emb_path,
                          int embedding_dim) {
  auto det = open_or_throw(det_path);
  if (emb_path) {
    auto emb = open_or_throw(*emb_path);
    return parse_mot(det, &emb, embedding_dim);
  }
  return parse_mot(det, nullptr, embedding_dim);
}

GtByFrame parse_gt(std::istream& in) {
  GtByFrame out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const std::string where = "gt line " + std::to_string(line_no);
    const auto f = split_csv(line);
    if (f.size() < 6) throw DataError(where + ": expected at least 6 fields, found " + std::to_string(f.size()));
    GtObject g;
    const int64_t frame = to_int(f[0], where);
    g.id = to_int(f[1], where);
    g.box = BBox::from_ltwh(to_double(f[2], where), to_double(f[3], where), to_double(f[4], where),
                            to_double(f[5], where));
    if (f.size() >= 7 && to_double(f[6], where) == 0.0) {
      out[frame];  // ignored entry, but the frame exists
      continue;
    }
    g.visibility = f.size() >= 9 ? to_double(f[8], where) : 1.0;
    if (g.visibility < 0.0 || g.visibility > 1.0) throw DataError(where + ": visibility outside [0,1]");
    out[frame].push_back(g);
  }
  return out;
}

GtByFrame load_gt(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_gt(in);
}

ResultsByFrame parse_results(std::istream& in) {
  ResultsByFrame out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const std::string where = "result line " + std::to_string(line_no);
    const auto f = split_csv(line);
    if (f.size() < 6) throw DataError(where + ": expected at least 6 fields, found " + std::to_string(f.size()));
    TrackOutput t;
    const int64_t frame = to_int(f[0], where);
    t.id = to_int(f[1], where);
    t.box = BBox::from_ltwh(to_double(f[2], where), to_double(f[3], where), to_double(f[4], where),
                            to_double(f[5], where));
    t.score = f.size() >= 7 ? to_double(f[6], where) : 1.0;
    out[frame].push_back(t);
  }
  return out;
}

ResultsByFrame load_results(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_results(in);
}

std::string format_results(const std::vector<FrameResult>& tracks) {
  std::string out;
  for (const auto& [frame, outputs] : results_by_frame(tracks)) {
    for (const auto& t : outputs) {
      out += std::to_string(frame) + ',' + std::to_string(t.id) + ',' + fmt("%.6f", t.box.x_left) + ',' +
             fmt("%.6f", t.box.y_top) + ',' + fmt("%.6f", t.box.width()) + ',' + fmt("%.6f", t.box.height()) + ',' +
             fmt("%.6f", t.score) + ",-1,-1,-1\n";
    }
  }
  return out;
}

std::string format_events(const std::vector<FrameResult>& tracks) {
  std::string out;
  for (const auto& [frame, outputs] : results_by_frame(tracks)) {
    for (const auto& t : outputs) {
      out += std::to_string(frame) + ',' + std::to_string(t.id) + ',' + (t.recovered ? "1" : "0") + '\n';
    }
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << text;
  if (!out) throw DataError("failed writing file: " + path);
}

void write_results(const std::vector<FrameResult>& tracks, const std::string& path) {
  write_text_file(path, format_results(tracks));
}

void write_events(const std::vector<FrameResult>& tracks, const std::string& path) {
  write_text_file(path, format_events(tracks));
}

std::string format_detections(const DetectionsByFrame& dets) {
  std::string out;
  for (const auto& [frame, list] : dets) {
    for (const auto& d : list) {
      out += std::to_string(frame) + ",-1," + fmt("%.6f", d.box.x_left) + ',' + fmt("%.6f", d.box.y_top) + ',' +
             fmt("%.6f", d.box.width()) + ',' + fmt("%.6f", d.box.height()) + ',' + fmt("%.6f", d.score) +
             ",-1,-1,-1\n";
    }
  }
  return out;
}

std::string format_embeddings(const DetectionsByFrame& dets) {
  std::string out;
  for (const auto& [frame, list] : dets) {
    for (const auto& d : list) {
      for (Eigen::Index k = 0; k < d.embedding.size(); ++k) {
        if (k) out += ',';
        out += fmt("%.9g", d.embedding(k));
      }
      out += '\n';
    }
  }
  return out;
}

std::string format_gt(const GtByFrame& gt) {
  std::string out;
  for (const auto& [frame, list] : gt) {
    for (const auto& g : list) {
      out += std::to_string(frame) + ',' + std::to_string(g.id) + ',' + fmt("%.6f", g.box.x_left) + ',' +
             fmt("%.6f", g.box.y_top) + ',' + fmt("%.6f", g.box.width()) + ',' + fmt("%.6f", g.box.height()) +
             ",1,1," + fmt("%.6f", g.visibility) + '\n';
    }
  }
  return out;
}

ResultsByFrame results_by_frame(const std::vector<FrameResult>& tracks) {
  ResultsByFrame out;
  for (const auto& fr : tracks) {
    auto& list = out[fr.frame];
    list.insert(list.end(), fr.outputs.begin(), fr.outputs.end());
  }
  for (auto& [frame, list] : out) {
    std::stable_sort(list.begin(), list.end(), [](const TrackOutput& a, const TrackOutput& b) { return a.id < b.id; });
  }
  return out;
}

}  // namespace sparsetrack
