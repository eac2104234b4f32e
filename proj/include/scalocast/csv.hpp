#pragma once

#include "scalocast/series.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace scalocast {

std::vector<std::string> split_csv_line(std::string_view line);

/// Counters and warnings accumulated while reading input files.
struct IngestReport {
    std::size_t rows = 0;
    std::size_t negative_diffs = 0;
    std::size_t masked_hours = 0;
    std::vector<std::string> warnings;
};

/// `timestamp,meter_id,reading_kwh` rows into one cumulative series per meter.
std::map<std::string, HourlySeries> read_meter_csv(const std::filesystem::path& path, IngestReport& report);

/// Reads every meter file (in sorted path order), differences each meter and
/// aggregates the district.
DistrictDemand ingest_meter_files(std::vector<std::filesystem::path> paths, IngestReport& report);

/// `timestamp,demand[,meter_count]`. With meter_count the demand column holds
/// district totals and is divided down to the per-meter average; without it
/// the values are taken as already per-meter with a count of 1.
DistrictDemand read_demand_csv(const std::filesystem::path& path, IngestReport& report);
void write_demand_csv(const std::filesystem::path& path, const DistrictDemand& demand);

inline constexpr std::string_view kWeatherFeatures[] = {"t_amb", "t_min", "t_max", "t_feels", "t_dew"};

/// `timestamp,<feature>[,<feature>...]`; unknown columns are skipped with a warning.
std::map<std::string, HourlySeries> read_weather_csv(const std::filesystem::path& path, IngestReport& report);
void write_weather_csv(const std::filesystem::path& path, const std::map<std::string, HourlySeries>& weather);

/// Writes `timestamp,value` (empty value for masked hours).
void write_series_csv(const std::filesystem::path& path, const HourlySeries& series, std::string_view column);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

} // namespace scalocast
