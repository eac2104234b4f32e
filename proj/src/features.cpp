#include "scalocast/features.hpp"

#include "scalocast/csv.hpp"
#include "scalocast/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace scalocast::features {

namespace {

constexpr std::chrono::hours kDay{24};

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_weather(std::string_view name) {
    return std::find(std::begin(kWeatherFeatures), std::end(kWeatherFeatures), name) != std::end(kWeatherFeatures);
}

struct Components {
    DayVector raw{};
    DayVector trend{};
    DayVector seasonal{};
    DayVector residual{};
};

/// Window [window_start, +24h) of a decomposed series. Trend values whose
/// centred average would read hours at or after target_start are replaced by
/// the trend at the last hour that does not.
std::optional<Components> window_components(const prep::DecomposedSeries& parts,
                                            std::span<const std::uint8_t> raw_missing, Hour window_start,
                                            Hour target_start) {
    const auto half = std::chrono::hours(parts.period / 2);
    const Hour last_causal = target_start - std::chrono::hours(1) - half;
    Components c;
    for (std::size_t k = 0; k < kHistory; ++k) {
        const Hour t = window_start + std::chrono::hours(static_cast<long>(k));
        const auto i = parts.observed.index_of(t);
        if (!i || raw_missing[*i])
            return std::nullopt;
        const auto ti = parts.trend.index_of(std::min(t, last_causal));
        if (!ti || parts.trend.missing(*ti))
            return std::nullopt;
        c.raw[k] = parts.observed[*i];
        c.trend[k] = parts.trend[*ti];
        c.seasonal[k] = parts.seasonal[*i];
        c.residual[k] = c.raw[k] - c.trend[k] - c.seasonal[k];
    }
    return c;
}

int last_known_count(const DistrictDemand& demand, Hour before) {
    auto idx = demand.demand.index_of(before - std::chrono::hours(1));
    if (!idx)
        return demand.meter_count.empty() ? 1 : (before <= demand.demand.start() ? demand.meter_count.front()
                                                                                  : demand.meter_count.back());
    return std::max(demand.meter_count[*idx], 1);
}

} // namespace

std::vector<std::string> FeatureSpec::channel_names() const {
    switch (kind) {
    case FeatureKind::DemandLag:
        if (decomposed)
            return {name, name + ".trend", name + ".seas", name + ".resid"};
        return {name};
    case FeatureKind::Weather:
        if (decomposed)
            return {name, name + ".trend", name + ".resid"};
        return {name};
    case FeatureKind::Cyclical:
        return {name + ".sin", name + ".cos"};
    case FeatureKind::HolidayCategorical:
        return {name};
    }
    return {};
}

FeatureSpec parse_feature(std::string_view text) {
    FeatureSpec spec;
    std::string_view base = text;
    if (ends_with(base, ".d")) {
        spec.decomposed = true;
        base.remove_suffix(2);
    }
    spec.name = std::string(base);
    if (base == "holiday_cat" || base == "time_cyc") {
        if (spec.decomposed)
            throw ConfigError("feature '" + std::string(text) + "' cannot be decomposed");
        spec.kind = base == "holiday_cat" ? FeatureKind::HolidayCategorical : FeatureKind::Cyclical;
        spec.lag_hours = 0;
        return spec;
    }
    if (base == "holiday_lag") {
        spec.kind = FeatureKind::DemandLag;
        spec.lag_hours = 168;
        spec.holiday_lag_substitution = true;
        return spec;
    }
    if (is_weather(base)) {
        spec.kind = FeatureKind::Weather;
        spec.source = std::string(base);
        spec.lag_hours = 24;
        return spec;
    }
    if (base.size() > 1 && base.front() == 'c') {
        int lag = 0;
        const auto digits = base.substr(1);
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), lag);
        if (ec == std::errc{} && ptr == digits.data() + digits.size()) {
            if (lag < 24 || lag % 24 != 0)
                throw ConfigError("demand lag '" + std::string(text) + "' must be a positive multiple of 24 hours");
            spec.kind = FeatureKind::DemandLag;
            spec.lag_hours = lag;
            return spec;
        }
    }
    throw ConfigError("unknown feature '" + std::string(text) + "'");
}

std::vector<FeatureSpec> parse_features(const std::vector<std::string>& names) {
    std::vector<FeatureSpec> out;
    for (const auto& n : names)
        out.push_back(parse_feature(n));
    const auto channels = channel_names(out);
    for (std::size_t i = 0; i < channels.size(); ++i)
        for (std::size_t j = i + 1; j < channels.size(); ++j)
            if (channels[i] == channels[j])
                throw ConfigError("duplicate feature channel '" + channels[i] + "'");
    return out;
}

std::vector<std::string> channel_names(std::span<const FeatureSpec> specs) {
    std::vector<std::string> out;
    for (const auto& s : specs)
        for (auto& c : s.channel_names())
            out.push_back(std::move(c));
    return out;
}

const Channel* SampleWindow::find(std::string_view name) const {
    for (const auto& c : channels)
        if (c.name == name)
            return &c;
    return nullptr;
}

Dataset make_dataset(DistrictDemand demand, std::map<std::string, HourlySeries> weather, HolidayCalendar calendar,
                     CivilClock clock, int period) {
    Dataset data{std::move(demand), {}, std::move(weather), {}, std::move(calendar), std::move(clock), period};
    auto decompose = [period](const HourlySeries& s) {
        auto parts = prep::seasonal_decompose(s.missing_count() ? prep::interpolate_missing(s) : s, period);
        return parts;
    };
    data.demand_parts = decompose(data.demand.demand);
    for (const auto& [name, series] : data.weather)
        data.weather_parts.emplace(name, decompose(series));
    return data;
}

std::pair<double, double> cyclical_encode(int index, int period) {
    if (period <= 0)
        throw ParameterError("cyclical_encode: period must be positive");
    // Reduce first so exact quarter turns land on exact values.
    const int r = ((index % period) + period) % period;
    if (4 * r == period)
        return {1.0, 0.0};
    if (2 * r == period)
        return {0.0, -1.0};
    if (4 * r == 3 * period)
        return {-1.0, 0.0};
    if (r == 0)
        return {0.0, 1.0};
    const double angle = 2.0 * std::numbers::pi * r / period;
    return {std::sin(angle), std::cos(angle)};
}

DayVector holiday_categorical(Date date, const HolidayCalendar& calendar) {
    DayVector v{};
    v.fill(calendar.contains(date) ? 1.0 : 0.0);
    return v;
}

std::optional<DayVector> build_lag_channel(const HourlySeries& series, Hour target_start, int lag_hours) {
    if (lag_hours < 24)
        throw ParameterError("build_lag_channel: lag must be at least 24 hours");
    const Hour window_start = target_start - std::chrono::hours(lag_hours);
    DayVector out{};
    for (std::size_t k = 0; k < kHistory; ++k) {
        const auto i = series.index_of(window_start + std::chrono::hours(static_cast<long>(k)));
        if (!i || series.missing(*i))
            return std::nullopt;
        out[k] = series[*i];
    }
    return out;
}

Hour holiday_lag_source(Date date, const HolidayCalendar& calendar, const HourlySeries& demand,
                        const CivilClock& clock) {
    const Hour target_start = clock.local_midnight(date);
    if (auto name = calendar.name(date)) {
        if (auto prev = calendar.previous_occurrence(*name, date)) {
            const Hour source = clock.local_midnight(*prev);
            if (build_lag_channel(demand, target_start, static_cast<int>((target_start - source).count())))
                return source;
        }
    }
    return target_start - std::chrono::hours(168);
}

std::optional<DayVector> substitute_holiday_lag(Date date, const HolidayCalendar& calendar, const HourlySeries& demand,
                                                const CivilClock& clock) {
    const Hour target_start = clock.local_midnight(date);
    const Hour source = holiday_lag_source(date, calendar, demand, clock);
    return build_lag_channel(demand, target_start, static_cast<int>((target_start - source).count()));
}

std::optional<SampleWindow> build_sample(const Dataset& data, std::span<const FeatureSpec> specs, Date date,
                                         bool require_target) {
    const auto& demand = data.demand.demand;
    SampleWindow s;
    s.forecast_date = date;
    s.target_start = data.clock.local_midnight(date);
    s.latest_source = s.target_start - std::chrono::hours(24 * 365 * 1000);

    s.has_target = true;
    const int fallback_count = last_known_count(data.demand, s.target_start);
    for (std::size_t h = 0; h < kHorizon; ++h) {
        const auto i = demand.index_of(s.target_start + std::chrono::hours(static_cast<long>(h)));
        if (!i || demand.missing(*i)) {
            s.has_target = false;
            s.target[h] = 0.0;
            s.meter_count[h] = i ? std::max(data.demand.meter_count[*i], 1) : fallback_count;
            continue;
        }
        s.target[h] = demand[*i];
        s.meter_count[h] = std::max(data.demand.meter_count[*i], 1);
    }
    if (require_target && !s.has_target)
        return std::nullopt;
    if (!s.has_target)
        s.target.fill(0.0);

    auto note_source = [&s](Hour window_start) {
        s.latest_source = std::max(s.latest_source, window_start + std::chrono::hours(23));
    };

    for (const auto& spec : specs) {
        switch (spec.kind) {
        case FeatureKind::DemandLag:
        case FeatureKind::Weather: {
            const prep::DecomposedSeries* parts = nullptr;
            std::span<const std::uint8_t> raw_missing;
            if (spec.kind == FeatureKind::DemandLag) {
                parts = &data.demand_parts;
                raw_missing = demand.missing_mask();
            } else {
                auto it = data.weather_parts.find(spec.source);
                if (it == data.weather_parts.end())
                    throw ContractError("feature '" + spec.name + "' needs weather column '" + spec.source + "'");
                parts = &it->second;
                raw_missing = data.weather.at(spec.source).missing_mask();
            }
            Hour window_start = s.target_start - std::chrono::hours(spec.lag_hours);
            if (spec.holiday_lag_substitution)
                window_start = holiday_lag_source(date, data.calendar, demand, data.clock);
            const auto comp = window_components(*parts, raw_missing, window_start, s.target_start);
            if (!comp)
                return std::nullopt;
            const auto names = spec.channel_names();
            s.channels.push_back({names[0], comp->raw});
            if (spec.decomposed) {
                s.channels.push_back({names[1], comp->trend});
                if (spec.kind == FeatureKind::DemandLag) {
                    s.channels.push_back({names[2], comp->seasonal});
                    s.channels.push_back({names[3], comp->residual});
                } else {
                    s.channels.push_back({names[2], comp->residual});
                }
            }
            note_source(window_start);
            break;
        }
        case FeatureKind::Cyclical: {
            const auto [sn, cs] = cyclical_encode(iso_weekday_index(date), 7);
            Channel a{spec.name + ".sin", {}};
            Channel b{spec.name + ".cos", {}};
            a.values.fill(sn);
            b.values.fill(cs);
            s.channels.push_back(a);
            s.channels.push_back(b);
            break;
        }
        case FeatureKind::HolidayCategorical:
            s.channels.push_back({spec.name, holiday_categorical(date, data.calendar)});
            break;
        }
    }
    if (s.latest_source >= s.target_start)
        throw ContractError("sample for " + format_date(date) + " reads data at or after its forecast start");
    return s;
}

SampleSet build_samples(const Dataset& data, std::span<const FeatureSpec> specs, const BuildOptions& options) {
    SampleSet out;
    const auto& demand = data.demand.demand;
    if (demand.empty())
        return out;
    std::chrono::sys_days first{data.clock.local_date(demand.start())};
    std::chrono::sys_days last{data.clock.local_date(demand.end() - std::chrono::hours(1))};
    if (options.first_date)
        first = std::max(first, std::chrono::sys_days{*options.first_date});
    if (options.last_date)
        last = std::min(last, std::chrono::sys_days{*options.last_date});
    for (auto day = first; day <= last; day += std::chrono::days{1}) {
        if (auto s = build_sample(data, specs, Date{day}, options.require_target))
            out.samples.push_back(std::move(*s));
        else
            ++out.skipped;
    }
    return out;
}

Scaler Scaler::fit(std::span<const SampleWindow> train) {
    if (train.size() < 2)
        throw ParameterError("Scaler::fit needs at least two training samples");
    Scaler sc;
    const auto& first = train.front();
    for (const auto& c : first.channels)
        sc.channel_names.push_back(c.name);
    const std::size_t f = sc.channel_names.size();
    sc.mean.assign(f, 0.0);
    sc.stddev.assign(f, 0.0);
    for (const auto& s : train) {
        if (s.channels.size() != f)
            throw ContractError("Scaler::fit: samples disagree on channel count");
        for (std::size_t c = 0; c < f; ++c) {
            if (s.channels[c].name != sc.channel_names[c])
                throw ContractError("Scaler::fit: samples disagree on channel order");
            for (double v : s.channels[c].values)
                sc.mean[c] += v;
        }
    }
    const double count = static_cast<double>(train.size() * kHistory);
    for (auto& m : sc.mean)
        m /= count;
    for (const auto& s : train)
        for (std::size_t c = 0; c < f; ++c)
            for (double v : s.channels[c].values)
                sc.stddev[c] += (v - sc.mean[c]) * (v - sc.mean[c]);
    auto finish = [](double var_sum, double n, double mean) {
        const double sd = std::sqrt(var_sum / n);
        return sd <= 1e-12 * std::max(1.0, std::abs(mean)) ? 1.0 : sd;
    };
    for (std::size_t c = 0; c < f; ++c)
        sc.stddev[c] = finish(sc.stddev[c], count, sc.mean[c]);

    sc.target_mean.fill(0.0);
    sc.target_std.fill(0.0);
    for (const auto& s : train)
        for (std::size_t h = 0; h < kHorizon; ++h)
            sc.target_mean[h] += s.target[h];
    const double n = static_cast<double>(train.size());
    for (auto& m : sc.target_mean)
        m /= n;
    for (const auto& s : train)
        for (std::size_t h = 0; h < kHorizon; ++h)
            sc.target_std[h] += (s.target[h] - sc.target_mean[h]) * (s.target[h] - sc.target_mean[h]);
    for (std::size_t h = 0; h < kHorizon; ++h)
        sc.target_std[h] = finish(sc.target_std[h], n, sc.target_mean[h]);
    return sc;
}

std::size_t Scaler::channel_index(std::string_view name) const {
    for (std::size_t i = 0; i < channel_names.size(); ++i)
        if (channel_names[i] == name)
            return i;
    throw ContractError("scaler has no channel '" + std::string(name) + "'");
}

SampleWindow Scaler::apply(const SampleWindow& sample) const {
    if (sample.channels.size() != channel_names.size())
        throw ContractError("Scaler::apply: channel count mismatch");
    SampleWindow out = sample;
    for (std::size_t c = 0; c < channel_names.size(); ++c) {
        if (out.channels[c].name != channel_names[c])
            throw ContractError("Scaler::apply: expected channel '" + channel_names[c] + "', got '" +
                                out.channels[c].name + "'");
        for (auto& v : out.channels[c].values)
            v = (v - mean[c]) / stddev[c];
    }
    if (out.has_target)
        for (std::size_t h = 0; h < kHorizon; ++h)
            out.target[h] = (out.target[h] - target_mean[h]) / target_std[h];
    return out;
}

std::vector<SampleWindow> Scaler::apply(std::span<const SampleWindow> samples) const {
    std::vector<SampleWindow> out;
    out.reserve(samples.size());
    for (const auto& s : samples)
        out.push_back(apply(s));
    return out;
}

SampleWindow Scaler::invert(const SampleWindow& sample) const {
    SampleWindow out = sample;
    for (std::size_t c = 0; c < channel_names.size(); ++c)
        out.channels[c].values = invert_channel(c, sample.channels[c].values);
    if (out.has_target)
        out.target = invert_target(sample.target);
    return out;
}

DayVector Scaler::invert_target(const DayVector& standardized) const {
    DayVector out{};
    for (std::size_t h = 0; h < kHorizon; ++h)
        out[h] = standardized[h] * target_std[h] + target_mean[h];
    return out;
}

DayVector Scaler::invert_channel(std::size_t channel, const DayVector& standardized) const {
    DayVector out{};
    for (std::size_t k = 0; k < kHistory; ++k)
        out[k] = standardized[k] * stddev.at(channel) + mean.at(channel);
    return out;
}

} // namespace scalocast::features
