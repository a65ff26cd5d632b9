#pragma once

#include "sparsetrack/types.hpp"

#include <map>
#include <string>

namespace sparsetrack {

/// Flat key=value settings. Keys are the configuration field names
/// (K, tau_init, tau_E, tau_N, age_max_frames, ..., w_size, w_node, ...).
using ConfigMap = std::map<std::string, std::string>;

/// Parses a line-oriented key=value file. Blank lines and '#' comments are
/// skipped; whitespace around keys and values is trimmed.
ConfigMap read_config_file(const std::string& path);
ConfigMap parse_config_text(const std::string& text);

/// Applies every entry that names a tracker or training field. Unknown keys
/// and unparsable values raise ConfigError.
void apply_config(const ConfigMap& entries, TrackerConfig& tracker, TrainConfig& train);

/// True when `key` names a tracker or training field.
bool is_config_key(const std::string& key);

/// Serializes both structs back to key=value lines.
std::string format_config(const TrackerConfig& tracker, const TrainConfig& train);

/// age_max in frames from a duration in seconds at the sequence frame rate.
int age_frames_from_seconds(double seconds, double fps);

}  // namespace sparsetrack
