#pragma once

#include "scalocast/civil_clock.hpp"
#include "scalocast/preprocess.hpp"
#include "scalocast/series.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scalocast::features {

inline constexpr std::size_t kHistory = 24;
inline constexpr std::size_t kHorizon = 24;

using DayVector = std::array<double, 24>;

enum class FeatureKind { DemandLag, Weather, Cyclical, HolidayCategorical };

/// One named entry of an experiment's feature list. Decomposed demand lags
/// expand to raw/trend/seasonal/residual channels; decomposed weather to
/// raw/trend/residual.
struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::DemandLag;
    int lag_hours = 24;
    bool decomposed = false;
    bool holiday_lag_substitution = false;
    /// Weather column for FeatureKind::Weather.
    std::string source;

    std::vector<std::string> channel_names() const;
    std::size_t channel_count() const { return channel_names().size(); }
};

/// Accepts `c<lag>`, `c<lag>.d`, `<weather>`, `<weather>.d`, `holiday_cat`,
/// `holiday_lag`, `holiday_lag.d` and `time_cyc`.
FeatureSpec parse_feature(std::string_view name);
std::vector<FeatureSpec> parse_features(const std::vector<std::string>& names);
std::vector<std::string> channel_names(std::span<const FeatureSpec> specs);

struct Channel {
    std::string name;
    DayVector values{};
};

/// One forecast day: channels built from data strictly before target_start,
/// and the per-meter demand of the 24 hours from target_start.
struct SampleWindow {
    Date forecast_date{};
    Hour target_start{};
    std::vector<Channel> channels;
    DayVector target{};
    bool has_target = false;
    std::array<int, 24> meter_count{};
    /// Latest hour any channel value was read from.
    Hour latest_source{};

    const Channel* find(std::string_view name) const;
};

/// Repaired inputs plus their decompositions and calendars.
struct Dataset {
    DistrictDemand demand;
    prep::DecomposedSeries demand_parts;
    std::map<std::string, HourlySeries> weather;
    std::map<std::string, prep::DecomposedSeries> weather_parts;
    HolidayCalendar calendar;
    CivilClock clock;
    int period = 24;
};

/// Decomposes the (already repaired) demand and weather series.
Dataset make_dataset(DistrictDemand demand, std::map<std::string, HourlySeries> weather, HolidayCalendar calendar,
                     CivilClock clock, int period = 24);

std::pair<double, double> cyclical_encode(int index, int period);

DayVector holiday_categorical(Date date, const HolidayCalendar& calendar);

/// The 24 hours starting lag_hours before target_start, or nullopt when any
/// of them is outside the series or masked.
std::optional<DayVector> build_lag_channel(const HourlySeries& series, Hour target_start, int lag_hours);

/// Start hour of the window that stands in for the weekly lag: the previous
/// occurrence of the same named holiday when `date` is a holiday whose
/// previous occurrence is available, else target_start − 168 h.
Hour holiday_lag_source(Date date, const HolidayCalendar& calendar, const HourlySeries& demand, const CivilClock& clock);

std::optional<DayVector> substitute_holiday_lag(Date date, const HolidayCalendar& calendar, const HourlySeries& demand,
                                                const CivilClock& clock);

struct BuildOptions {
    bool require_target = true;
    std::optional<Date> first_date;
    std::optional<Date> last_date;
};

struct SampleSet {
    std::vector<SampleWindow> samples;
    /// Days in range skipped because a channel or the target was unavailable.
    std::size_t skipped = 0;
};

SampleSet build_samples(const Dataset& data, std::span<const FeatureSpec> specs, const BuildOptions& options = {});

/// Builds the sample for one date (target optional); nullopt if a channel is unavailable.
std::optional<SampleWindow> build_sample(const Dataset& data, std::span<const FeatureSpec> specs, Date date,
                                         bool require_target);

/// Per-channel z-scores with train-only statistics; targets use one
/// mean/std per horizon hour.
struct Scaler {
    std::vector<std::string> channel_names;
    std::vector<double> mean;
    std::vector<double> stddev;
    DayVector target_mean{};
    DayVector target_std{};

    static Scaler fit(std::span<const SampleWindow> train);

    SampleWindow apply(const SampleWindow& sample) const;
    std::vector<SampleWindow> apply(std::span<const SampleWindow> samples) const;
    SampleWindow invert(const SampleWindow& sample) const;
    DayVector invert_target(const DayVector& standardized) const;
    DayVector invert_channel(std::size_t channel, const DayVector& standardized) const;
    std::size_t channel_index(std::string_view name) const;
};

} // namespace scalocast::features
