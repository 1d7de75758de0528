#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "modeloc/locate.hpp"
#include "modeloc/types.hpp"

namespace modeloc {

/// Multi-channel CSV: a header row starting with `t`, one column per channel,
/// `#` comment lines. Empty cells are allowed only as leading or trailing runs
/// of a column; such channels come back shorter with a shifted start_time.
ChannelSet load_csv(const std::filesystem::path& path);
ChannelSet parse_csv(std::istream& in, const std::string& source = "<stream>");

/// Writes channels sharing sample rate and length; timestamps start at the
/// first channel's start_time. Values use shortest round-trip formatting.
void write_csv(const std::filesystem::path& path, const ChannelSet& channels);
void write_csv(std::ostream& out, const ChannelSet& channels);

/// Samples with t0 <= t < t1 (t measured like start_time).
ChannelSet slice_window(const ChannelSet& channels, double t0, double t1);

/// Crops every channel to the time range covered by all of them.
ChannelSet trim_to_common(const ChannelSet& channels);

/// Parses "lo:hi".
std::pair<double, double> parse_range(const std::string& text);

GeoMap load_geo(const std::filesystem::path& path);

inline constexpr const char* kReportSchemaVersion = "v1";

nlohmann::json shape_to_json(const ModeShape& shape);
ModeShape shape_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const PipelineConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);

nlohmann::json report_to_json(const LocationReport& report);
LocationReport report_from_json(const nlohmann::json& j);
void write_report(const LocationReport& report, const std::filesystem::path& path);
LocationReport load_report(const std::filesystem::path& path);

/// Structural validation of a report document; empty when valid.
std::vector<std::string> validate_report_json(const nlohmann::json& j);

/// Baseline natural shape: either a bare shape document or a report, whose
/// natural_shape is used.
ModeShape load_baseline(const std::filesystem::path& path);
void write_shape(const ModeShape& shape, const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace modeloc
