#pragma once

#include "plume/config.hpp"
#include "plume/metrics.hpp"
#include "plume/mission.hpp"
#include "plume/rl/ppo.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

// Text artifacts: JSON-lines episode logs, CSV tables and SVG overlays. All
// number formatting is locale-independent and shortest round-trip.
namespace plume::io {

inline constexpr const char* kLogFormat = "plume-episode/1";

/// Episode outcome written as the log's last line.
struct LogSummary {
  bool completed = false;  // reached InPlume and was scored
  std::optional<metrics::MetricsReport> metrics;
};

struct LoadedLog {
  mission::EpisodeLog log;
  config::RunConfig config;
  std::string config_json;   // canonical form as stored in the header
  std::optional<LogSummary> summary;
};

/// Header line, one line per tick, then the summary line.
std::string encode_log(const mission::EpisodeLog& log, const config::RunConfig& cfg,
                       const std::optional<LogSummary>& summary);
/// Throws ArtifactError on malformed input.
LoadedLog decode_log(std::string_view text);

void write_log(const std::filesystem::path& path, const mission::EpisodeLog& log, const config::RunConfig& cfg,
               const std::optional<LogSummary>& summary);
LoadedLog read_log(const std::filesystem::path& path);

/// Shortest round-trip decimal form, '.' separator.
std::string format_number(double v);

struct ReportRow {
  std::string scenario;
  std::string controller;
  int run = 0;
  std::optional<metrics::MetricsReport> report;  // empty for runs that never reached InPlume
};

std::string report_csv_header();
std::string report_csv_line(const ReportRow& row);
std::string report_csv(const std::vector<ReportRow>& rows);

struct AggregateLine {
  std::string scenario;
  std::string controller;
  metrics::AggregateRow row;
  int attempted = 0;
};

std::string aggregate_csv(const std::vector<AggregateLine>& lines);

std::string curve_csv(const std::vector<rl::CurveRecord>& curve);

/// Observer-image overlay: mask silhouette, contour, mean line and drone track.
std::string overlay_svg(int width, int height, const geom::Polygon& contour, const geom::Polyline& skeleton,
                        const std::vector<Vec2>& track, const std::string& title);

}  // namespace plume::io
