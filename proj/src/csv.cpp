#include "scalocast/csv.hpp"

#include "scalocast/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

namespace scalocast {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view text, const std::string& where) {
    text = trim(text);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw InputError(where + ": invalid number '" + std::string(text) + "'");
    return v;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
};

CsvTable read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open " + path.string());
    CsvTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        auto fields = split_csv_line(line);
        for (auto& f : fields)
            f = std::string(trim(f));
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(lineno);
    }
    if (table.header.empty())
        throw InputError(path.string() + ": empty file");
    return table;
}

std::string location(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line);
}

/// Builds a gap-aware series from (hour, value) pairs. Hours not present are masked.
HourlySeries series_from_points(std::vector<std::pair<Hour, double>> points, Unit unit, const std::string& what) {
    if (points.empty())
        throw InputError(what + ": no rows");
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].first == points[i - 1].first)
            throw InputError(what + ": duplicate timestamp " + format_timestamp(points[i].first));
    const Hour start = points.front().first;
    const auto n = static_cast<std::size_t>((points.back().first - start).count()) + 1;
    std::vector<double> values(n, 0.0);
    std::vector<std::uint8_t> missing(n, 1);
    for (const auto& [t, v] : points) {
        const auto i = static_cast<std::size_t>((t - start).count());
        if (std::isfinite(v)) {
            values[i] = v;
            missing[i] = 0;
        }
    }
    return HourlySeries(start, std::move(values), std::move(missing), unit);
}

} // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (c != '\r' && c != '\n') {
            field.push_back(c);
        }
    }
    out.push_back(std::move(field));
    return out;
}

std::string format_double(double v) {
    if (!std::isfinite(v))
        return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

std::map<std::string, HourlySeries> read_meter_csv(const std::filesystem::path& path, IngestReport& report) {
    const auto table = read_table(path);
    if (table.header.size() < 3 || table.header[0] != "timestamp" || table.header[1] != "meter_id" ||
        table.header[2] != "reading_kwh")
        throw InputError(path.string() + ": expected header 'timestamp,meter_id,reading_kwh'");
    if (table.header.size() > 3)
        report.warnings.push_back(path.string() + ": ignoring " + std::to_string(table.header.size() - 3) +
                                  " extra column(s)");
    std::map<std::string, std::vector<std::pair<Hour, double>>> points;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto where = location(path, table.line_numbers[r]);
        if (row.size() < 3)
            throw InputError(where + ": expected 3 fields");
        const double reading = row[2].empty() ? std::nan("") : parse_double(row[2], where);
        points[row[1]].emplace_back(parse_timestamp(row[0]), reading);
        ++report.rows;
    }
    std::map<std::string, HourlySeries> out;
    for (auto& [meter, pts] : points)
        out.emplace(meter, series_from_points(std::move(pts), Unit::kWh, path.string() + " meter " + meter));
    return out;
}

DistrictDemand ingest_meter_files(std::vector<std::filesystem::path> paths, IngestReport& report) {
    std::sort(paths.begin(), paths.end());
    std::vector<HourlySeries> consumption;
    std::set<std::string> seen;
    for (const auto& path : paths) {
        for (auto& [meter, cumulative] : read_meter_csv(path, report)) {
            if (!seen.insert(meter).second)
                throw InputError("meter '" + meter + "' appears in more than one file");
            auto diff = diff_cumulative(cumulative);
            report.negative_diffs += diff.negative_indices.size();
            for (auto i : diff.negative_indices)
                report.warnings.push_back("meter " + meter + ": negative consumption at " +
                                          format_timestamp(diff.consumption.time_at(i)) + " masked");
            consumption.push_back(std::move(diff.consumption));
        }
    }
    auto district = aggregate_district(consumption);
    report.masked_hours = district.demand.missing_count();
    return district;
}

DistrictDemand read_demand_csv(const std::filesystem::path& path, IngestReport& report) {
    const auto table = read_table(path);
    if (table.header.size() < 2 || table.header[0] != "timestamp" || table.header[1] != "demand")
        throw InputError(path.string() + ": expected header 'timestamp,demand[,meter_count]'");
    const bool has_count = table.header.size() >= 3 && table.header[2] == "meter_count";
    const std::size_t used = has_count ? 3 : 2;
    if (table.header.size() > used)
        report.warnings.push_back(path.string() + ": ignoring " + std::to_string(table.header.size() - used) +
                                  " extra column(s)");
    std::vector<std::pair<Hour, double>> demand_pts;
    std::vector<std::pair<Hour, double>> count_pts;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto where = location(path, table.line_numbers[r]);
        if (row.size() < used)
            throw InputError(where + ": expected " + std::to_string(used) + " fields");
        const Hour t = parse_timestamp(row[0]);
        double total = row[1].empty() ? std::nan("") : parse_double(row[1], where);
        double count = 1.0;
        if (has_count) {
            count = row[2].empty() ? std::nan("") : parse_double(row[2], where);
            if (std::isfinite(count) && (count < 1.0 || count != std::floor(count)))
                throw InputError(where + ": meter_count must be a positive integer");
            if (!std::isfinite(count))
                total = std::nan("");
        }
        demand_pts.emplace_back(t, total / count);
        count_pts.emplace_back(t, count);
        ++report.rows;
    }
    auto demand = series_from_points(std::move(demand_pts), Unit::kWh, path.string());
    auto counts = series_from_points(std::move(count_pts), Unit::Dimensionless, path.string());
    std::vector<int> meter_count(demand.size(), 0);
    std::vector<double> values(demand.values().begin(), demand.values().end());
    std::vector<std::uint8_t> missing(demand.missing_mask().begin(), demand.missing_mask().end());
    for (std::size_t i = 0; i < demand.size(); ++i) {
        if (!counts.missing(i))
            meter_count[i] = static_cast<int>(counts[i]);
        if (meter_count[i] == 0)
            missing[i] = 1;
        if (!missing[i] && values[i] < 0.0)
            ++report.negative_diffs;
    }
    // Keep the last known count through masked hours so totals stay defined.
    int last = 0;
    for (auto& c : meter_count) {
        if (c > 0)
            last = c;
        else
            c = last;
    }
    int first = 0;
    for (auto c : meter_count)
        if (c > 0) {
            first = c;
            break;
        }
    for (auto& c : meter_count)
        if (c == 0)
            c = first;
    auto series = demand.with_values(std::move(values), std::move(missing));
    report.masked_hours = series.missing_count();
    return DistrictDemand{std::move(series), std::move(meter_count)};
}

void write_demand_csv(const std::filesystem::path& path, const DistrictDemand& demand) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write " + path.string());
    out << "timestamp,demand,meter_count\n";
    for (std::size_t i = 0; i < demand.demand.size(); ++i) {
        out << format_timestamp(demand.demand.time_at(i)) << ',';
        if (!demand.demand.missing(i))
            out << format_double(demand.demand[i] * demand.meter_count[i]);
        out << ',' << demand.meter_count[i] << '\n';
    }
}

std::map<std::string, HourlySeries> read_weather_csv(const std::filesystem::path& path, IngestReport& report) {
    const auto table = read_table(path);
    if (table.header.size() < 2 || table.header[0] != "timestamp")
        throw InputError(path.string() + ": expected header 'timestamp,<feature>...'");
    std::vector<std::size_t> columns;
    for (std::size_t c = 1; c < table.header.size(); ++c) {
        const auto& name = table.header[c];
        if (std::find(std::begin(kWeatherFeatures), std::end(kWeatherFeatures), name) == std::end(kWeatherFeatures)) {
            report.warnings.push_back(path.string() + ": ignoring unknown weather column '" + name + "'");
            continue;
        }
        columns.push_back(c);
    }
    if (columns.empty())
        throw InputError(path.string() + ": no known weather feature columns");
    std::map<std::string, std::vector<std::pair<Hour, double>>> points;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto where = location(path, table.line_numbers[r]);
        const Hour t = parse_timestamp(row.at(0));
        for (auto c : columns) {
            const double v = (c >= row.size() || row[c].empty()) ? std::nan("") : parse_double(row[c], where);
            points[table.header[c]].emplace_back(t, v);
        }
        ++report.rows;
    }
    std::map<std::string, HourlySeries> out;
    for (auto& [name, pts] : points) {
        auto series = series_from_points(std::move(pts), Unit::Celsius, path.string() + " " + name);
        report.masked_hours += series.missing_count();
        out.emplace(name, std::move(series));
    }
    return out;
}

void write_weather_csv(const std::filesystem::path& path, const std::map<std::string, HourlySeries>& weather) {
    if (weather.empty())
        throw InputError("write_weather_csv: nothing to write");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write " + path.string());
    std::vector<std::string> names;
    for (auto name : kWeatherFeatures)
        if (weather.contains(std::string(name)))
            names.emplace_back(name);
    const auto& first = weather.at(names.front());
    out << "timestamp";
    for (const auto& n : names)
        out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < first.size(); ++i) {
        const Hour t = first.time_at(i);
        out << format_timestamp(t);
        for (const auto& n : names) {
            const auto& s = weather.at(n);
            out << ',';
            if (auto j = s.index_of(t); j && !s.missing(*j))
                out << format_double(s[*j]);
        }
        out << '\n';
    }
}

void write_series_csv(const std::filesystem::path& path, const HourlySeries& series, std::string_view column) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write " + path.string());
    out << "timestamp," << column << '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << format_timestamp(series.time_at(i)) << ',';
        if (!series.missing(i))
            out << format_double(series[i]);
        out << '\n';
    }
}

} // namespace scalocast
