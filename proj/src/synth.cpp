#include "scalocast/synth.hpp"

#include "scalocast/civil_clock.hpp"
#include "scalocast/csv.hpp"
#include "scalocast/error.hpp"
#include "scalocast/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace scalocast::synth {

namespace {

using std::chrono::hours;
using std::chrono::sys_days;

double daily_profile(int hour) {
    // morning and evening peaks
    const double m = (hour - 7.0) / 1.5;
    const double e = (hour - 19.0) / 2.0;
    return 0.65 + 0.7 * std::exp(-0.5 * m * m) + 0.5 * std::exp(-0.5 * e * e);
}

} // namespace

SynthData generate(std::uint64_t seed, const SynthSpec& spec) {
    if (spec.years < 2)
        throw ParameterError("synthetic data needs at least two years");
    if (spec.meter_count < 1)
        throw ParameterError("meter count must be positive");
    const CivilClock clock(spec.timezone);
    const std::chrono::year y0{spec.start_year};
    const Hour start = clock.local_midnight(Date{y0, std::chrono::January, std::chrono::day{1}});
    const Hour end = clock.local_midnight(Date{y0 + std::chrono::years(spec.years), std::chrono::January, std::chrono::day{1}});
    const auto n = static_cast<std::size_t>((end - start).count());

    SynthData out;
    out.holidays = danish_holidays(spec.start_year - 1, spec.start_year + spec.years);

    nn::Rng rng(seed);
    std::vector<double> temp(n), level(n), dewgap(n);
    std::vector<Date> local_day(n);
    double ar = 0.0, ar2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Hour t = start + hours(static_cast<long>(i));
        const Date d = clock.local_date(t);
        local_day[i] = d;
        const int hour = clock.local_hour(t);
        const auto jan1 = sys_days(Date{d.year(), std::chrono::January, std::chrono::day{1}});
        const double doy = static_cast<double>((sys_days(d) - jan1).count());
        ar = 0.998 * ar + spec.temp_ar_sd * rng.normal();
        ar2 = 0.99 * ar2 + 0.1 * rng.normal();
        temp[i] = 8.0 - 9.0 * std::cos(2.0 * std::numbers::pi * (doy - 20.0) / 365.25) +
                  3.0 * std::sin(2.0 * std::numbers::pi * (hour - 9) / 24.0) + ar;
        dewgap[i] = 3.0 + 1.5 * std::cos(2.0 * std::numbers::pi * (doy - 200.0) / 365.25) + std::abs(ar2);
        double v = (spec.base + spec.slope * std::max(0.0, 17.0 - temp[i])) * daily_profile(hour);
        if (is_weekend(d))
            v *= spec.weekend_factor;
        if (out.holidays.contains(d))
            v *= spec.holiday_factor;
        level[i] = v;
    }

    // noise std: a fixed share of each local day's mean noiseless level
    std::vector<double> noise_sd(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < n && local_day[j] == local_day[i])
            sum += level[j++];
        const double sd = spec.noise * sum / static_cast<double>(j - i);
        std::fill(noise_sd.begin() + static_cast<long>(i), noise_sd.begin() + static_cast<long>(j), sd);
        i = j;
    }
    std::vector<double> demand(n);
    for (std::size_t i = 0; i < n; ++i)
        demand[i] = std::max(0.0, level[i] + noise_sd[i] * rng.normal());

    const std::size_t spikes = static_cast<std::size_t>(spec.spikes_per_year) * static_cast<std::size_t>(spec.years);
    std::set<std::size_t> chosen;
    const std::size_t margin = 24 * 8;
    while (chosen.size() < spikes && n > 2 * margin) {
        const std::size_t k = margin + rng.below(n - 2 * margin);
        // A holiday dip is itself a several-sigma event for the day-to-day
        // smoother and would mask a spike on or next to it.
        const auto day = sys_days(local_day[k]);
        if (out.holidays.contains(Date{day}) || out.holidays.contains(Date{day - std::chrono::days{1}}) ||
            out.holidays.contains(Date{day + std::chrono::days{1}}))
            continue;
        // keep spikes apart so each is an isolated event
        auto it = chosen.lower_bound(k > 48 ? k - 48 : 0);
        if (it != chosen.end() && *it <= k + 48)
            continue;
        chosen.insert(k);
    }
    for (std::size_t k : chosen)
        demand[k] += spec.spike_sigma * noise_sd[k];
    out.outliers.assign(chosen.begin(), chosen.end());

    // slowly growing meter population
    std::vector<int> counts(n);
    for (std::size_t i = 0; i < n; ++i)
        counts[i] = spec.meter_count + static_cast<int>(std::floor(0.05 * spec.meter_count * static_cast<double>(i) / n));

    out.demand.demand = HourlySeries(start, demand, Unit::kWh);
    out.demand.meter_count = counts;

    std::vector<double> tmin(n), tmax(n), tfeels(n), tdew(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= 23 ? i - 23 : 0;
        tmin[i] = *std::min_element(temp.begin() + static_cast<long>(lo), temp.begin() + static_cast<long>(i) + 1);
        tmax[i] = *std::max_element(temp.begin() + static_cast<long>(lo), temp.begin() + static_cast<long>(i) + 1);
        tfeels[i] = temp[i] - 0.1 * std::max(0.0, 12.0 - temp[i]) - 0.8 * std::abs(std::sin(0.013 * static_cast<double>(i)));
        tdew[i] = temp[i] - dewgap[i];
    }
    out.weather["t_amb"] = HourlySeries(start, temp, Unit::Celsius);
    out.weather["t_min"] = HourlySeries(start, tmin, Unit::Celsius);
    out.weather["t_max"] = HourlySeries(start, tmax, Unit::Celsius);
    out.weather["t_feels"] = HourlySeries(start, tfeels, Unit::Celsius);
    out.weather["t_dew"] = HourlySeries(start, tdew, Unit::Celsius);

    for (int m = 0; m < spec.meter_files; ++m) {
        const double share = 0.6 + 0.8 * rng.uniform();
        std::vector<double> cumulative(n + 1);
        double total = 1000.0 * rng.uniform();
        cumulative[0] = total;
        for (std::size_t i = 0; i < n; ++i) {
            total += std::max(0.0, share * level[i] * (1.0 + 0.1 * rng.normal()));
            cumulative[i + 1] = total;
        }
        char id[16];
        std::snprintf(id, sizeof id, "M%04d", m + 1);
        out.meters[id] = HourlySeries(start, cumulative, Unit::kWh);
    }
    return out;
}

void write_dataset(const SynthData& data, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_demand_csv(dir / "demand.csv", data.demand);
    write_weather_csv(dir / "weather.csv", data.weather);
    data.holidays.save(dir / "holidays.csv");
    {
        std::ofstream os(dir / "outliers.csv", std::ios::binary);
        os << "index,timestamp\n";
        for (std::size_t k : data.outliers)
            os << k << ',' << format_timestamp(data.demand.demand.time_at(k)) << '\n';
        if (!os)
            throw InputError("cannot write outliers.csv");
    }
    if (!data.meters.empty()) {
        std::ofstream os(dir / "meters.csv", std::ios::binary);
        os << "timestamp,meter_id,reading_kwh\n";
        const std::size_t n = data.meters.begin()->second.size();
        for (std::size_t i = 0; i < n; ++i)
            for (const auto& [id, s] : data.meters)
                os << format_timestamp(s.time_at(i)) << ',' << id << ',' << format_double(s[i]) << '\n';
        if (!os)
            throw InputError("cannot write meters.csv");
    }
}

} // namespace scalocast::synth
