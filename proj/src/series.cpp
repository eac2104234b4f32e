#include "scalocast/series.hpp"

#include "scalocast/csv.hpp"
#include "scalocast/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>

namespace scalocast {

namespace {

int parse_int(std::string_view text, std::string_view what) {
    int value = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw InputError("invalid " + std::string(what) + " '" + std::string(text) + "'");
    return value;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

} // namespace

std::string_view unit_name(Unit unit) {
    switch (unit) {
    case Unit::kWh:
        return "kWh";
    case Unit::Celsius:
        return "degC";
    case Unit::Dimensionless:
        return "1";
    }
    return "?";
}

Date parse_date(std::string_view text) {
    text = trim(text);
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw InputError("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
    const Date d{std::chrono::year{parse_int(text.substr(0, 4), "year")},
                 std::chrono::month{static_cast<unsigned>(parse_int(text.substr(5, 2), "month"))},
                 std::chrono::day{static_cast<unsigned>(parse_int(text.substr(8, 2), "day"))}};
    if (!d.ok())
        throw InputError("invalid calendar date '" + std::string(text) + "'");
    return d;
}

std::string format_date(Date d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

Hour parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    text = trim(text);
    if (text.size() < 16 || (text[10] != 'T' && text[10] != ' ') || text[13] != ':')
        throw InputError("invalid timestamp '" + std::string(text) + "'");
    const Date date = parse_date(text.substr(0, 10));
    const int hh = parse_int(text.substr(11, 2), "hour");
    const int mm = parse_int(text.substr(14, 2), "minute");
    int ss = 0;
    std::string_view rest = text.substr(16);
    if (!rest.empty() && rest.front() == ':') {
        if (rest.size() < 3)
            throw InputError("invalid timestamp '" + std::string(text) + "'");
        ss = parse_int(rest.substr(1, 2), "second");
        rest.remove_prefix(3);
        if (!rest.empty() && rest.front() == '.') {
            // Fractional seconds must be zero for hourly data.
            rest.remove_prefix(1);
            while (!rest.empty() && rest.front() >= '0' && rest.front() <= '9') {
                if (rest.front() != '0')
                    throw InputError("timestamp '" + std::string(text) + "' is not on an hour boundary");
                rest.remove_prefix(1);
            }
        }
    }
    int offset_minutes = 0;
    if (!rest.empty()) {
        if (rest == "Z" || rest == "z") {
            offset_minutes = 0;
        } else if ((rest.front() == '+' || rest.front() == '-') && (rest.size() == 6 || rest.size() == 5 || rest.size() == 3)) {
            const int sign = rest.front() == '-' ? -1 : 1;
            const int oh = parse_int(rest.substr(1, 2), "offset");
            int om = 0;
            if (rest.size() == 6)
                om = parse_int(rest.substr(4, 2), "offset");
            else if (rest.size() == 5)
                om = parse_int(rest.substr(3, 2), "offset");
            offset_minutes = sign * (oh * 60 + om);
        } else {
            throw InputError("invalid timestamp offset in '" + std::string(text) + "'");
        }
    }
    if (hh > 23 || mm > 59 || ss > 60)
        throw InputError("invalid time of day in '" + std::string(text) + "'");
    const auto instant = sys_days{date} + hours{hh} + minutes{mm} + seconds{ss} - minutes{offset_minutes};
    const auto floored = floor<hours>(instant);
    if (floored != instant)
        throw InputError("timestamp '" + std::string(text) + "' is not on an hour boundary");
    return Hour{floored};
}

std::string format_timestamp(Hour t) {
    using namespace std::chrono;
    const auto day = floor<days>(t);
    const Date d{day};
    const auto hh = (t - day).count();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:00:00Z", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()), static_cast<long>(hh));
    return buf;
}

HourlySeries::HourlySeries(Hour start, std::vector<double> values, std::vector<std::uint8_t> missing, Unit unit)
    : start_(start), values_(std::move(values)), missing_(std::move(missing)), unit_(unit) {
    if (values_.size() != missing_.size())
        throw ShapeError("HourlySeries: values and missing mask differ in length");
}

HourlySeries::HourlySeries(Hour start, std::vector<double> values, Unit unit)
    : start_(start), values_(std::move(values)), missing_(values_.size(), 0), unit_(unit) {}

std::size_t HourlySeries::missing_count() const {
    return static_cast<std::size_t>(std::count(missing_.begin(), missing_.end(), std::uint8_t{1}));
}

std::optional<std::size_t> HourlySeries::index_of(Hour t) const {
    if (t < start_)
        return std::nullopt;
    const auto i = static_cast<std::size_t>((t - start_).count());
    if (i >= values_.size())
        return std::nullopt;
    return i;
}

HourlySeries HourlySeries::with_values(std::vector<double> values, std::vector<std::uint8_t> missing) const {
    if (values.size() != values_.size())
        throw ShapeError("HourlySeries::with_values: length changed");
    return HourlySeries(start_, std::move(values), std::move(missing), unit_);
}

HourlySeries HourlySeries::with_values(std::vector<double> values) const {
    std::vector<std::uint8_t> missing(values.size(), 0);
    return with_values(std::move(values), std::move(missing));
}

HourlySeries HourlySeries::slice(std::size_t first, std::size_t count) const {
    if (first + count > values_.size())
        throw ShapeError("HourlySeries::slice out of range");
    const auto b = static_cast<std::ptrdiff_t>(first);
    const auto e = static_cast<std::ptrdiff_t>(first + count);
    return HourlySeries(time_at(first), std::vector<double>(values_.begin() + b, values_.begin() + e),
                        std::vector<std::uint8_t>(missing_.begin() + b, missing_.begin() + e), unit_);
}

HourlySeries HourlySeries::aligned(Hour start, Hour end) const {
    if (end < start)
        throw ParameterError("HourlySeries::aligned: end before start");
    const auto n = static_cast<std::size_t>((end - start).count());
    std::vector<double> values(n, 0.0);
    std::vector<std::uint8_t> missing(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (auto j = index_of(start + std::chrono::hours(static_cast<long>(i)))) {
            values[i] = values_[*j];
            missing[i] = missing_[*j];
        }
    }
    return HourlySeries(start, std::move(values), std::move(missing), unit_);
}

std::vector<double> DistrictDemand::totals() const {
    std::vector<double> out(demand.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = demand[i] * meter_count[i];
    return out;
}

DiffResult diff_cumulative(const HourlySeries& readings) {
    if (readings.size() < 2)
        throw InputError("diff_cumulative: need at least two readings");
    const std::size_t n = readings.size() - 1;
    std::vector<double> out(n, 0.0);
    std::vector<std::uint8_t> missing(n, 0);
    DiffResult result;
    for (std::size_t i = 0; i < n; ++i) {
        if (readings.missing(i) || readings.missing(i + 1)) {
            missing[i] = 1;
            continue;
        }
        const double d = readings[i + 1] - readings[i];
        if (d < 0.0) {
            missing[i] = 1;
            result.negative_indices.push_back(i);
            continue;
        }
        out[i] = d;
    }
    result.consumption = HourlySeries(readings.start(), std::move(out), std::move(missing), Unit::kWh);
    return result;
}

DistrictDemand aggregate_district(std::span<const HourlySeries> meters) {
    if (meters.empty())
        throw InputError("aggregate_district: no meters");
    Hour start = meters.front().start();
    Hour end = meters.front().end();
    for (const auto& m : meters) {
        start = std::min(start, m.start());
        end = std::max(end, m.end());
    }
    const auto n = static_cast<std::size_t>((end - start).count());
    std::vector<double> sum(n, 0.0);
    std::vector<int> count(n, 0);
    for (const auto& m : meters) {
        const auto offset = static_cast<std::size_t>((m.start() - start).count());
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m.missing(i))
                continue;
            sum[offset + i] += m[i];
            ++count[offset + i];
        }
    }
    std::vector<std::uint8_t> missing(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (count[i] == 0) {
            missing[i] = 1;
            sum[i] = 0.0;
        } else {
            sum[i] /= count[i];
        }
    }
    return DistrictDemand{HourlySeries(start, std::move(sum), std::move(missing), Unit::kWh), std::move(count)};
}

std::vector<double> rescale_total(std::span<const double> per_meter, int meter_count) {
    if (meter_count < 1)
        throw ParameterError("rescale_total: meter count must be >= 1");
    std::vector<double> out(per_meter.begin(), per_meter.end());
    for (auto& v : out)
        v *= meter_count;
    return out;
}

std::vector<double> rescale_total(std::span<const double> per_meter, std::span<const int> meter_count) {
    if (per_meter.size() != meter_count.size())
        throw ShapeError("rescale_total: length mismatch");
    std::vector<double> out(per_meter.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (meter_count[i] < 1)
            throw ParameterError("rescale_total: meter count must be >= 1");
        out[i] = per_meter[i] * meter_count[i];
    }
    return out;
}

void HolidayCalendar::add(Date date, std::string name) {
    const std::chrono::sys_days key{date};
    if (entries_.contains(key))
        throw InputError("holiday calendar: duplicate date " + format_date(date));
    entries_.emplace(key, std::move(name));
}

bool HolidayCalendar::contains(Date date) const { return entries_.contains(std::chrono::sys_days{date}); }

std::optional<std::string> HolidayCalendar::name(Date date) const {
    auto it = entries_.find(std::chrono::sys_days{date});
    if (it == entries_.end())
        return std::nullopt;
    return it->second;
}

std::optional<Date> HolidayCalendar::previous_occurrence(const std::string& name, Date date) const {
    auto it = entries_.lower_bound(std::chrono::sys_days{date});
    while (it != entries_.begin()) {
        --it;
        if (it->second == name)
            return Date{it->first};
    }
    return std::nullopt;
}

HolidayCalendar HolidayCalendar::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open holiday file " + path.string());
    HolidayCalendar cal;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto view = trim(line);
        if (view.empty() || view.front() == '#')
            continue;
        auto fields = split_csv_line(view);
        if (fields.size() < 2)
            throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected 'YYYY-MM-DD,name'");
        if (lineno == 1 && fields[0] == "date")
            continue;
        cal.add(parse_date(fields[0]), std::string(trim(fields[1])));
    }
    return cal;
}

void HolidayCalendar::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write " + path.string());
    for (const auto& [day, name] : entries_)
        out << format_date(Date{day}) << ',' << name << '\n';
}

namespace {

// Anonymous Gregorian algorithm.
Date easter_sunday(int year) {
    const int a = year % 19;
    const int b = year / 100;
    const int c = year % 100;
    const int d = b / 4;
    const int e = b % 4;
    const int f = (b + 8) / 25;
    const int g = (b - f + 1) / 3;
    const int h = (19 * a + b - d - g + 15) % 30;
    const int i = c / 4;
    const int k = c % 4;
    const int l = (32 + 2 * e + 2 * i - h - k) % 7;
    const int m = (a + 11 * h + 22 * l) / 451;
    const int month = (h + l - 7 * m + 114) / 31;
    const int day = ((h + l - 7 * m + 114) % 31) + 1;
    return Date{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                std::chrono::day{static_cast<unsigned>(day)}};
}

} // namespace

HolidayCalendar danish_holidays(int first_year, int last_year) {
    using namespace std::chrono;
    HolidayCalendar cal;
    for (int y = first_year; y <= last_year; ++y) {
        const sys_days easter{easter_sunday(y)};
        cal.add(Date{year{y}, January, day{1}}, "Nytårsdag");
        cal.add(Date{easter - days{3}}, "Skærtorsdag");
        cal.add(Date{easter - days{2}}, "Langfredag");
        cal.add(Date{easter}, "Påskedag");
        cal.add(Date{easter + days{1}}, "Anden påskedag");
        // Abolished from 2024 on.
        if (y < 2024)
            cal.add(Date{easter + days{26}}, "Store bededag");
        cal.add(Date{easter + days{39}}, "Kristi himmelfartsdag");
        cal.add(Date{easter + days{49}}, "Pinsedag");
        cal.add(Date{easter + days{50}}, "Anden pinsedag");
        cal.add(Date{year{y}, December, day{25}}, "Juledag");
        cal.add(Date{year{y}, December, day{26}}, "Anden juledag");
    }
    return cal;
}

} // namespace scalocast
