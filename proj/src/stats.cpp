#include "scalocast/stats.hpp"

#include "scalocast/civil_clock.hpp"
#include "scalocast/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scalocast::stats {

Metrics metrics(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size())
        throw ParameterError("actual and predicted lengths differ");
    if (actual.empty())
        throw ParameterError("metrics need at least one value");
    Metrics m;
    double abs_sum = 0.0, sq_sum = 0.0, pct_sum = 0.0;
    std::size_t pct_n = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - predicted[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        if (std::abs(actual[i]) < kMapeEpsilon) {
            ++m.mape_excluded;
        } else {
            pct_sum += std::abs(e / actual[i]);
            ++pct_n;
        }
    }
    const auto n = static_cast<double>(actual.size());
    m.mae = abs_sum / n;
    m.mse = sq_sum / n;
    m.mape = pct_n ? 100.0 * pct_sum / static_cast<double>(pct_n) : std::nan("");
    return m;
}

Summary summarize(std::span<const double> values) {
    Summary s;
    std::size_t n = 0;
    double sum = 0.0;
    for (double v : values)
        if (std::isfinite(v)) {
            sum += v;
            ++n;
        }
    if (n == 0)
        return {std::nan(""), std::nan("")};
    s.mean = sum / static_cast<double>(n);
    if (n > 1) {
        double ss = 0.0;
        for (double v : values)
            if (std::isfinite(v))
                ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(n - 1));
    }
    return s;
}

double median(std::vector<double> values) {
    if (values.empty())
        throw ParameterError("median of an empty list");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void MetricsReport::add(Date day, const Metrics& m) {
    days.push_back(day);
    mae.push_back(m.mae);
    mape.push_back(m.mape);
    mse.push_back(m.mse);
    mape_excluded += m.mape_excluded;
}

MetricsReport MetricsReport::subset(std::span<const std::size_t> indices) const {
    MetricsReport r;
    for (std::size_t i : indices) {
        r.days.push_back(days[i]);
        r.mae.push_back(mae[i]);
        r.mape.push_back(mape[i]);
        r.mse.push_back(mse[i]);
    }
    return r;
}

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]])
            ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ParameterError("correlation needs two equal-length inputs of at least 2 values");
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw UndefinedStatistic("correlation of a constant input is undefined");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ParameterError("spearman needs two equal-length inputs of at least 2 values");
    return pearson(average_ranks(x), average_ranks(y));
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ParameterError("paired samples differ in length");
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] - b[i] != 0.0)
            d.push_back(a[i] - b[i]);
    if (d.empty())
        throw UndefinedStatistic("all paired differences are zero");

    std::vector<double> absd(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        absd[i] = std::abs(d[i]);
    const auto ranks = average_ranks(absd);

    WilcoxonResult r;
    r.n = d.size();
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] > 0)
            r.statistic += ranks[i];

    const std::size_t n = d.size();
    if (n <= 25) {
        // Doubled ranks are integers even with ties; count sign assignments
        // per attainable doubled sum.
        std::vector<int> doubled(n);
        int total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            doubled[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
            total += doubled[i];
        }
        std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
        count[0] = 1.0;
        int reach = 0;
        for (int w : doubled) {
            for (int s = reach; s >= 0; --s)
                if (count[static_cast<std::size_t>(s)] != 0.0)
                    count[static_cast<std::size_t>(s + w)] += count[static_cast<std::size_t>(s)];
            reach += w;
        }
        const int observed = static_cast<int>(std::lround(2.0 * r.statistic));
        double lower = 0.0, upper = 0.0, all = 0.0;
        for (int s = 0; s <= total; ++s) {
            const double c = count[static_cast<std::size_t>(s)];
            all += c;
            if (s <= observed)
                lower += c;
            if (s >= observed)
                upper += c;
        }
        r.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
        r.exact = true;
        return r;
    }

    const auto nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
    std::vector<double> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && sorted[j] == sorted[i])
            ++j;
        const auto t = static_cast<double>(j - i);
        var -= (t * t * t - t) / 48.0;
        i = j;
    }
    if (var <= 0.0)
        throw UndefinedStatistic("signed-rank variance is zero");
    const double z = (r.statistic - mean) / std::sqrt(var);
    r.p_value = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
    return r;
}

namespace {

double spearman_masked(const HourlySeries& x, const HourlySeries& y, long shift) {
    // pairs (x[i + shift], y[i])
    std::vector<double> a, b;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const long j = static_cast<long>(i) + shift;
        if (j < 0 || j >= static_cast<long>(x.size()))
            continue;
        if (x.missing(static_cast<std::size_t>(j)) || y.missing(i))
            continue;
        a.push_back(x[static_cast<std::size_t>(j)]);
        b.push_back(y[i]);
    }
    return spearman(a, b);
}

} // namespace

std::vector<double> lag_correlogram(const HourlySeries& series, std::span<const int> lags) {
    std::vector<double> out;
    for (int lag : lags) {
        if (lag < 1 || static_cast<std::size_t>(lag) + 2 > series.size())
            throw ParameterError("series too short for lag " + std::to_string(lag));
        out.push_back(spearman_masked(series, series, lag));
    }
    return out;
}

ComponentCorrelation component_correlations(const prep::DecomposedSeries& demand, const prep::DecomposedSeries& weather) {
    auto pair = [&](const HourlySeries& d, const HourlySeries& w) {
        const Hour start = std::max(d.start(), w.start());
        const Hour end = std::min(d.end(), w.end());
        if (end <= start)
            throw ParameterError("demand and weather spans do not overlap");
        return spearman_masked(d.aligned(start, end), w.aligned(start, end), 0);
    };
    ComponentCorrelation c;
    c.raw = pair(demand.observed, weather.observed);
    c.trend = pair(demand.trend, weather.trend);
    c.seasonal = pair(demand.seasonal, weather.seasonal);
    c.residual = pair(demand.residual, weather.residual);
    return c;
}

DayType day_type(Date date, const HolidayCalendar& calendar) {
    return (is_weekend(date) || calendar.contains(date)) ? DayType::NonWorking : DayType::Working;
}

bool dissimilar_transition(Date date, const HolidayCalendar& calendar) {
    const Date prev{std::chrono::sys_days(date) - std::chrono::days(1)};
    return day_type(date, calendar) != day_type(prev, calendar);
}

StratifiedReport stratify_days(const MetricsReport& report, const HolidayCalendar& calendar) {
    StratifiedReport out;
    std::map<std::string, std::vector<std::size_t>> holiday, transition, named;
    for (std::size_t i = 0; i < report.days.size(); ++i) {
        const Date d = report.days[i];
        const auto name = calendar.name(d);
        holiday[name ? "holiday" : "non-holiday"].push_back(i);
        transition[dissimilar_transition(d, calendar) ? "dissimilar" : "similar"].push_back(i);
        if (name)
            named[*name].push_back(i);
    }
    for (auto& [k, v] : holiday)
        out.axes["holiday"][k] = report.subset(v);
    for (auto& [k, v] : transition)
        out.axes["transition"][k] = report.subset(v);
    for (auto& [k, v] : named)
        out.axes["named_holiday"][k] = report.subset(v);
    return out;
}

} // namespace scalocast::stats
