#pragma once

#include "scalocast/series.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace scalocast::synth {

/// Knobs of the synthetic district. Demand per meter is
///   (base + slope · max(0, 17 − T)) · daily profile · weekday factor · holiday factor
/// plus Gaussian noise whose std is `noise` times the day's mean level.
struct SynthSpec {
    int start_year = 2016;
    int years = 4;
    std::string timezone = "Europe/Copenhagen";
    double base = 0.25;
    double slope = 0.08;
    double noise = 0.03;
    double weekend_factor = 0.97;
    double holiday_factor = 0.85;
    double temp_ar_sd = 0.06;
    int spikes_per_year = 18;
    double spike_sigma = 10.0;
    int meter_count = 1000;
    /// When positive, also emit cumulative readings for this many meters.
    int meter_files = 0;
};

struct SynthData {
    DistrictDemand demand;
    std::map<std::string, HourlySeries> weather;
    HolidayCalendar holidays;
    /// Injected spike positions (indices into demand.demand), sorted.
    std::vector<std::size_t> outliers;
    /// Per-meter cumulative series when meter_files > 0.
    std::map<std::string, HourlySeries> meters;
};

/// Deterministic for a given seed and spec.
SynthData generate(std::uint64_t seed, const SynthSpec& spec);

/// demand.csv, weather.csv, holidays.csv, outliers.csv and optionally meters.csv.
void write_dataset(const SynthData& data, const std::filesystem::path& dir);

} // namespace scalocast::synth
