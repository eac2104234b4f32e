#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scalocast {

using Hour = std::chrono::sys_time<std::chrono::hours>;
using Date = std::chrono::year_month_day;

enum class Unit { kWh, Celsius, Dimensionless };

std::string_view unit_name(Unit unit);

/// Parses `YYYY-MM-DD[T| ]HH:MM[:SS][Z|±HH:MM]`. Timestamps without an offset
/// are UTC. Throws InputError if the instant is not on an hour boundary.
Hour parse_timestamp(std::string_view text);
std::string format_timestamp(Hour t);

Date parse_date(std::string_view text);
std::string format_date(Date d);

/// Gap-aware hourly value sequence. Element i is the value for the hour
/// starting at start() + i hours; gaps are carried in the missing mask.
class HourlySeries {
public:
    HourlySeries() = default;
    HourlySeries(Hour start, std::vector<double> values, std::vector<std::uint8_t> missing, Unit unit);
    /// Fully observed series.
    HourlySeries(Hour start, std::vector<double> values, Unit unit);

    Hour start() const { return start_; }
    /// One past the last hour.
    Hour end() const { return start_ + std::chrono::hours(static_cast<long>(values_.size())); }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    Unit unit() const { return unit_; }

    std::span<const double> values() const { return values_; }
    std::span<const std::uint8_t> missing_mask() const { return missing_; }
    double operator[](std::size_t i) const { return values_[i]; }
    bool missing(std::size_t i) const { return missing_[i] != 0; }
    std::size_t missing_count() const;

    Hour time_at(std::size_t i) const { return start_ + std::chrono::hours(static_cast<long>(i)); }
    /// Index of hour t, or nullopt when t is outside the span.
    std::optional<std::size_t> index_of(Hour t) const;

    /// Same calendar span and unit, new payload.
    HourlySeries with_values(std::vector<double> values, std::vector<std::uint8_t> missing) const;
    HourlySeries with_values(std::vector<double> values) const;
    HourlySeries slice(std::size_t first, std::size_t count) const;
    /// Re-indexes onto [start, end), masking hours that are not covered.
    HourlySeries aligned(Hour start, Hour end) const;

private:
    Hour start_{};
    std::vector<double> values_;
    std::vector<std::uint8_t> missing_;
    Unit unit_ = Unit::Dimensionless;
};

/// Per-meter averaged district demand with the number of meters that
/// contributed at each hour.
struct DistrictDemand {
    HourlySeries demand;
    std::vector<int> meter_count;

    std::vector<double> totals() const;
};

struct DiffResult {
    HourlySeries consumption;
    /// Indices (into consumption) where the cumulative reading went backwards.
    std::vector<std::size_t> negative_indices;
};

/// First-order difference of a cumulative meter series. Output element i is
/// labelled with the hour of reading i. Negative differences are masked.
DiffResult diff_cumulative(const HourlySeries& readings);

/// Per-hour mean over the unmasked meters. Series are aligned onto the union
/// of their spans first; hours without any unmasked meter are masked.
DistrictDemand aggregate_district(std::span<const HourlySeries> meters);

std::vector<double> rescale_total(std::span<const double> per_meter, int meter_count);
std::vector<double> rescale_total(std::span<const double> per_meter, std::span<const int> meter_count);

class HolidayCalendar {
public:
    HolidayCalendar() = default;

    /// Throws InputError on a duplicate date.
    void add(Date date, std::string name);
    bool contains(Date date) const;
    std::optional<std::string> name(Date date) const;
    /// Most recent date strictly before `date` that carries the same name.
    std::optional<Date> previous_occurrence(const std::string& name, Date date) const;
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::map<std::chrono::sys_days, std::string>& entries() const { return entries_; }

    static HolidayCalendar load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

private:
    std::map<std::chrono::sys_days, std::string> entries_;
};

/// Public holidays observed in Denmark for one calendar year.
HolidayCalendar danish_holidays(int first_year, int last_year);

} // namespace scalocast
