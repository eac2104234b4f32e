#pragma once

#include "scalocast/series.hpp"

#include <span>
#include <string>
#include <vector>

namespace scalocast::prep {

/// Savitzky-Golay smoothing: each output is the value at its position of the
/// least-squares polynomial fitted over the window centred on it. The first
/// and last window/2 points are evaluated on the nearest full window.
std::vector<double> savgol_smooth(std::span<const double> values, int window, int polyorder);
HourlySeries savgol_smooth(const HourlySeries& series, int window, int polyorder);

/// Additive decomposition: observed = trend + seasonal + residual.
struct DecomposedSeries {
    HourlySeries observed;
    /// Masked for the first and last period/2 hours.
    HourlySeries trend;
    /// Defined everywhere; zero mean over a period.
    HourlySeries seasonal;
    /// Masked wherever trend is.
    HourlySeries residual;
    int period = 24;
    std::size_t parent_length = 0;
};

/// Classical moving-average decomposition (2×period MA for even periods).
/// Phase of element i is i mod period. Requires no masked values.
DecomposedSeries seasonal_decompose(const HourlySeries& series, int period);

struct OutlierOptions {
    double alpha = 0.05;
    /// Savitzky-Golay window, counted in samples of each phase sub-series
    /// (7 = one week of daily samples when period = 24).
    int window = 7;
    int polyorder = 3;
    /// Stride of the phase sub-series. 1 smooths the raw series directly
    /// without detrending.
    int period = 24;
    /// Centred window (hours) of the robust residual scale.
    int scale_window = 169;
    /// With period 24, group phases by this zone's clock hour so the daily
    /// shape stays aligned across DST changes. Empty: plain index modulo period.
    std::string timezone;
};

struct OutlierReport {
    std::vector<std::size_t> indices;
    /// Studentized statistic per flagged index (infinite for values flagged
    /// only because they are negative consumption).
    std::vector<double> statistic;
    double threshold = 0.0;
    double alpha = 0.0;
};

/// Residual after removing the local level and the local daily shape.
/// `phase[i]` in [0, period) assigns points to sub-series; empty means i % period.
std::vector<double> detection_residual(std::span<const double> values, const OutlierOptions& options,
                                       std::span<const int> phase = {});
/// Phase labels for `series` under `options` (local clock hour or index modulo period).
std::vector<int> detection_phases(const HourlySeries& series, const OutlierOptions& options);

/// Median absolute deviation × 1.4826 over a centred window (shifted inwards
/// at the edges).
std::vector<double> rolling_robust_scale(std::span<const double> values, int window);

/// Two-sided Bonferroni threshold: Student-t quantile at 1 − alpha/(2n).
double bonferroni_threshold(double alpha, std::size_t n, double dof);

/// Masked hours are linearly interpolated before testing; they are not part
/// of the report (repair_outliers handles them separately).
OutlierReport detect_outliers(const HourlySeries& series, const OutlierOptions& options);

/// Linear interpolation across masked runs; edge runs copy the nearest value.
HourlySeries interpolate_missing(const HourlySeries& series);

/// Replaces flagged and masked hours by trend + seasonal of the series with
/// those hours provisionally interpolated. kWh values are floored at zero.
HourlySeries repair_outliers(const HourlySeries& series, const OutlierReport& report, int period = 24);

struct CleanResult {
    HourlySeries repaired;
    OutlierReport report;
};

CleanResult clean_series(const HourlySeries& series, const OutlierOptions& options);

} // namespace scalocast::prep
