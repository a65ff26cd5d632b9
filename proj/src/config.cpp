#include "sparsetrack/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace sparsetrack {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: value for '" + key + "' is not a number: '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config: value for '" + key + "' is not an integer: '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on") return true;
  if (value == "0" || value == "false" || value == "off") return false;
  throw ConfigError("config: value for '" + key + "' is not a boolean: '" + value + "'");
}

using Setter = std::function<void(TrackerConfig&, TrainConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"K", [](auto& t, auto&, auto& k, auto& v) { t.top_k = parse_int(k, v); }},
      {"tau_init", [](auto& t, auto&, auto& k, auto& v) { t.tau_init = parse_double(k, v); }},
      {"tau_E", [](auto& t, auto&, auto& k, auto& v) { t.tau_edge = parse_double(k, v); }},
      {"tau_N", [](auto& t, auto&, auto& k, auto& v) { t.tau_node = parse_double(k, v); }},
      {"age_max_frames", [](auto& t, auto&, auto& k, auto& v) { t.age_max_frames = parse_int(k, v); }},
      {"age_min_frames", [](auto& t, auto&, auto& k, auto& v) { t.age_min_frames = parse_int(k, v); }},
      {"n_iter", [](auto& t, auto&, auto& k, auto& v) { t.n_iter = parse_int(k, v); }},
      {"position_scale", [](auto& t, auto&, auto& k, auto& v) { t.position_scale = parse_double(k, v); }},
      {"edges_per_criterion", [](auto& t, auto&, auto& k, auto& v) { t.edges_per_criterion = parse_int(k, v); }},
      {"d_node", [](auto& t, auto&, auto& k, auto& v) { t.d_node = parse_int(k, v); }},
      {"d_edge", [](auto& t, auto&, auto& k, auto& v) { t.d_edge = parse_int(k, v); }},
      {"recovery", [](auto& t, auto&, auto& k, auto& v) { t.recovery = parse_bool(k, v); }},
      {"node_gate", [](auto& t, auto&, auto& k, auto& v) { t.node_gate = parse_bool(k, v); }},
      {"w_size", [](auto&, auto& r, auto& k, auto& v) { r.w_size = parse_double(k, v); }},
      {"w_off", [](auto&, auto& r, auto& k, auto& v) { r.w_off = parse_double(k, v); }},
      {"w_edge", [](auto&, auto& r, auto& k, auto& v) { r.w_edge = parse_double(k, v); }},
      {"w_node", [](auto&, auto& r, auto& k, auto& v) { r.w_node = parse_double(k, v); }},
      {"focal_gamma", [](auto&, auto& r, auto& k, auto& v) { r.focal_gamma = parse_double(k, v); }},
      {"focal_alpha", [](auto&, auto& r, auto& k, auto& v) { r.focal_alpha = parse_double(k, v); }},
      {"iou_label_threshold", [](auto&, auto& r, auto& k, auto& v) { r.iou_label_threshold = parse_double(k, v); }},
      {"learning_rate", [](auto&, auto& r, auto& k, auto& v) { r.learning_rate = parse_double(k, v); }},
      {"optimizer", [](auto&, auto& r, auto&, auto& v) { r.optimizer = v; }},
      {"heatmap_stride", [](auto&, auto& r, auto& k, auto& v) { r.heatmap_stride = parse_int(k, v); }},
      {"gaussian_min_overlap", [](auto&, auto& r, auto& k, auto& v) { r.gaussian_min_overlap = parse_double(k, v); }},
      {"heatmap_raw_sum", [](auto&, auto& r, auto& k, auto& v) { r.heatmap_raw_sum = parse_bool(k, v); }},
  };
  return table;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid configuration: " + what);
}

}  // namespace

void TrackerConfig::validate() const {
  require(top_k >= 1, "K must be >= 1");
  require(tau_init >= 0.0 && tau_init <= 1.0, "tau_init must lie in [0,1]");
  require(tau_edge >= 0.0 && tau_edge <= 1.0, "tau_E must lie in [0,1]");
  require(tau_node >= 0.0 && tau_node <= 1.0, "tau_N must lie in [0,1]");
  require(age_max_frames >= 0, "age_max_frames must be >= 0");
  require(age_min_frames >= 0, "age_min_frames must be >= 0");
  require(n_iter >= 0, "n_iter must be >= 0");
  require(edges_per_criterion >= 1, "edges_per_criterion must be >= 1");
  require(position_scale > 0.0, "position_scale must be > 0");
  require(d_node >= 1, "d_node must be >= 1");
  require(d_edge >= 1, "d_edge must be >= 1");
}

void TrainConfig::validate() const {
  require(w_size >= 0.0 && w_off >= 0.0 && w_edge >= 0.0 && w_node >= 0.0, "loss weights must be >= 0");
  require(focal_gamma >= 0.0, "focal_gamma must be >= 0");
  require(focal_alpha >= 0.0 && focal_alpha <= 1.0, "focal_alpha must lie in [0,1]");
  require(iou_label_threshold > 0.0 && iou_label_threshold <= 1.0, "iou_label_threshold must lie in (0,1]");
  require(learning_rate >= 0.0, "learning_rate must be >= 0");
  require(optimizer == "gd" || optimizer == "adam", "optimizer must be gd or adam");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam betas must lie in [0,1)");
  require(heatmap_stride >= 1, "heatmap_stride must be >= 1");
  require(gaussian_min_overlap > 0.0 && gaussian_min_overlap < 1.0, "gaussian_min_overlap must lie in (0,1)");
}

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

bool is_config_key(const std::string& key) { return setters().count(key) != 0; }

void apply_config(const ConfigMap& entries, TrackerConfig& tracker, TrainConfig& train) {
  for (const auto& [key, value] : entries) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("config: unknown key '" + key + "'");
    it->second(tracker, train, key, value);
  }
}

std::string format_config(const TrackerConfig& t, const TrainConfig& r) {
  std::ostringstream out;
  out.precision(17);
  out << "K=" << t.top_k << "\n"
      << "tau_init=" << t.tau_init << "\n"
      << "tau_E=" << t.tau_edge << "\n"
      << "tau_N=" << t.tau_node << "\n"
      << "age_max_frames=" << t.age_max_frames << "\n"
      << "age_min_frames=" << t.age_min_frames << "\n"
      << "n_iter=" << t.n_iter << "\n"
      << "edges_per_criterion=" << t.edges_per_criterion << "\n"
      << "position_scale=" << t.position_scale << "\n"
      << "d_node=" << t.d_node << "\n"
      << "d_edge=" << t.d_edge << "\n"
      << "recovery=" << (t.recovery ? 1 : 0) << "\n"
      << "node_gate=" << (t.node_gate ? 1 : 0) << "\n"
      << "w_size=" << r.w_size << "\n"
      << "w_off=" << r.w_off << "\n"
      << "w_edge=" << r.w_edge << "\n"
      << "w_node=" << r.w_node << "\n"
      << "focal_gamma=" << r.focal_gamma << "\n"
      << "focal_alpha=" << r.focal_alpha << "\n"
      << "iou_label_threshold=" << r.iou_label_threshold << "\n"
      << "learning_rate=" << r.learning_rate << "\n"
      << "optimizer=" << r.optimizer << "\n"
      << "heatmap_stride=" << r.heatmap_stride << "\n"
      << "gaussian_min_overlap=" << r.gaussian_min_overlap << "\n"
      << "heatmap_raw_sum=" << (r.heatmap_raw_sum ? 1 : 0) << "\n";
  return out.str();
}

int age_frames_from_seconds(double seconds, double fps) {
  if (seconds < 0.0 || fps <= 0.0) throw ConfigError("age: seconds must be >= 0 and fps > 0");
  return static_cast<int>(std::lround(seconds * fps));
}

}  // namespace sparsetrack
