#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "monce/metrics.hpp"
#include "monce/model.hpp"

namespace monce {

enum class TrackFormat { MonceCsv };

/// One `key = value` line of a config or scenario file.
struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Splits text into key-value entries; blank lines and `#` comments are skipped.
std::vector<KeyValue> read_key_values(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// CSV with header `frame,uid,x,y,w,h[,conf]`. Rows may come in any order.
/// video_length is max frame + 1. Throws ParseError with the offending line.
TrackSet parse_track_text(std::string_view text);
TrackSet parse_track_file(const std::filesystem::path& path, TrackFormat format = TrackFormat::MonceCsv);

/// Writes `track` in the same CSV schema, rows ordered by (frame, uid).
std::string format_track_csv(const TrackSet& track);
void write_track_file(const TrackSet& track, const std::filesystem::path& path);

/// Unknown keys and out-of-range values throw ConfigError naming the key.
EvalConfig parse_config_text(std::string_view text);
EvalConfig parse_config(const std::filesystem::path& path);

/// Deterministic JSON (fixed key order, shortest round-trip doubles).
std::string report_to_json(const MetricReport& report);
MetricReport report_from_json(std::string_view json);
void write_report(const MetricReport& report, const std::filesystem::path& path);
MetricReport read_report(const std::filesystem::path& path);

namespace detail {
// Strict numeric field parsing shared by the text formats.
double parse_real(std::string_view text, std::string_view what, std::size_t line);
long parse_integer(std::string_view text, std::string_view what, std::size_t line);
bool parse_bool(std::string_view text, std::string_view what, std::size_t line);
std::string_view trim(std::string_view text) noexcept;
std::vector<std::string_view> split(std::string_view text, char sep);
}  // namespace detail

}  // namespace monce
