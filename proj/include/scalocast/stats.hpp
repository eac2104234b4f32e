#pragma once

#include "scalocast/preprocess.hpp"
#include "scalocast/series.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace scalocast::stats {

inline constexpr double kMapeEpsilon = 1e-6;

struct Metrics {
    double mae = 0.0;
    /// Percent.
    double mape = 0.0;
    double mse = 0.0;
    /// Terms dropped from MAPE because |actual| < kMapeEpsilon.
    std::size_t mape_excluded = 0;
};

/// Throws ParameterError on empty or unequal inputs.
Metrics metrics(std::span<const double> actual, std::span<const double> predicted);

struct Summary {
    double mean = 0.0;
    /// Sample standard deviation (0 for a single value).
    double std = 0.0;
};
Summary summarize(std::span<const double> values);
double median(std::vector<double> values);

/// Per-day metric lists with their aggregates.
struct MetricsReport {
    std::vector<Date> days;
    std::vector<double> mae;
    std::vector<double> mape;
    std::vector<double> mse;
    std::size_t mape_excluded = 0;

    void add(Date day, const Metrics& m);
    std::size_t count() const { return days.size(); }
    Summary mae_summary() const { return summarize(mae); }
    Summary mape_summary() const { return summarize(mape); }
    Summary mse_summary() const { return summarize(mse); }
    /// Days at the given positions. Aggregates skip NaN MAPE (every term excluded).
    MetricsReport subset(std::span<const std::size_t> indices) const;
};

/// Average ranks (1-based, ties share the mean rank).
std::vector<double> average_ranks(std::span<const double> x);
double pearson(std::span<const double> x, std::span<const double> y);
/// Throws UndefinedStatistic when either input is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct WilcoxonResult {
    double statistic = 0.0; // W+ (sum of positive ranks)
    double p_value = 1.0;
    std::size_t n = 0;      // after dropping zero differences
    bool exact = false;
};

/// Two-sided signed-rank test on paired samples. Zero differences are dropped;
/// n ≤ 25 uses the exact null distribution, larger n the normal
/// approximation with tie correction. Throws UndefinedStatistic if every
/// difference is zero.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// Spearman ρ between the series and itself shifted by each lag (masked
/// pairs dropped).
std::vector<double> lag_correlogram(const HourlySeries& series, std::span<const int> lags);

struct ComponentCorrelation {
    double raw = 0.0, trend = 0.0, seasonal = 0.0, residual = 0.0;
};
/// Spearman ρ of each aligned component pair, dropping pairs where either side is masked.
ComponentCorrelation component_correlations(const prep::DecomposedSeries& demand, const prep::DecomposedSeries& weather);

enum class DayType { Working, NonWorking };
DayType day_type(Date date, const HolidayCalendar& calendar);
/// True when the day type differs from that of the previous day.
bool dissimilar_transition(Date date, const HolidayCalendar& calendar);

struct StratifiedReport {
    /// Axis name → group label → report. Axes: "holiday" (holiday / non-holiday),
    /// "transition" (similar / dissimilar), "named_holiday" (one group per name).
    std::map<std::string, std::map<std::string, MetricsReport>> axes;
};
StratifiedReport stratify_days(const MetricsReport& report, const HolidayCalendar& calendar);

} // namespace scalocast::stats
