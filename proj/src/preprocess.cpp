#include "scalocast/preprocess.hpp"

#include "scalocast/civil_clock.hpp"
#include "scalocast/error.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace scalocast::prep {

namespace {

void check_savgol(std::size_t n, int window, int polyorder) {
    if (window < 1 || window % 2 == 0)
        throw ParameterError("savgol_smooth: window must be a positive odd integer");
    if (polyorder < 0 || polyorder >= window)
        throw ParameterError("savgol_smooth: polyorder must satisfy 0 <= polyorder < window");
    if (n < static_cast<std::size_t>(window))
        throw ParameterError("savgol_smooth: series shorter than window");
}

/// Row k of the projection onto polynomials of degree <= polyorder over
/// window positions -h..h: the weights that produce the fitted value at k.
Eigen::MatrixXd savgol_projection(int window, int polyorder) {
    const int h = window / 2;
    Eigen::MatrixXd vander(window, polyorder + 1);
    for (int r = 0; r < window; ++r) {
        const double x = h == 0 ? 0.0 : static_cast<double>(r - h) / h;
        double p = 1.0;
        for (int c = 0; c <= polyorder; ++c) {
            vander(r, c) = p;
            p *= x;
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(vander);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(window, polyorder + 1);
    return q * q.transpose();
}

void require_complete(const HourlySeries& series, const char* what) {
    if (series.missing_count() != 0)
        throw InputError(std::string(what) + ": series has masked values; interpolate or repair first");
}

} // namespace

std::vector<double> savgol_smooth(std::span<const double> values, int window, int polyorder) {
    check_savgol(values.size(), window, polyorder);
    const auto proj = savgol_projection(window, polyorder);
    const int h = window / 2;
    const auto n = static_cast<std::ptrdiff_t>(values.size());
    std::vector<double> out(values.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        std::ptrdiff_t lo = i - h;
        int row = h;
        if (lo < 0) {
            row = static_cast<int>(i);
            lo = 0;
        } else if (i + h >= n) {
            lo = n - window;
            row = static_cast<int>(i - lo);
        }
        double acc = 0.0;
        for (int j = 0; j < window; ++j)
            acc += proj(row, j) * values[static_cast<std::size_t>(lo + j)];
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

HourlySeries savgol_smooth(const HourlySeries& series, int window, int polyorder) {
    require_complete(series, "savgol_smooth");
    return series.with_values(savgol_smooth(series.values(), window, polyorder));
}

DecomposedSeries seasonal_decompose(const HourlySeries& series, int period) {
    if (period < 2)
        throw ParameterError("seasonal_decompose: period must be >= 2");
    if (series.size() < 2 * static_cast<std::size_t>(period))
        throw ParameterError("seasonal_decompose: series shorter than two periods");
    require_complete(series, "seasonal_decompose");

    const auto x = series.values();
    const std::size_t n = x.size();
    const std::size_t h = static_cast<std::size_t>(period / 2);
    const bool even = period % 2 == 0;

    std::vector<double> trend(n, 0.0);
    std::vector<std::uint8_t> undefined(n, 1);
    for (std::size_t i = h; i + h < n; ++i) {
        double acc = 0.0;
        if (even) {
            acc = 0.5 * x[i - h] + 0.5 * x[i + h];
            for (std::size_t j = i - h + 1; j < i + h; ++j)
                acc += x[j];
        } else {
            for (std::size_t j = i - h; j <= i + h; ++j)
                acc += x[j];
        }
        trend[i] = acc / period;
        undefined[i] = 0;
    }

    std::vector<double> phase_sum(static_cast<std::size_t>(period), 0.0);
    std::vector<std::size_t> phase_count(static_cast<std::size_t>(period), 0);
    for (std::size_t i = h; i + h < n; ++i) {
        phase_sum[i % period] += x[i] - trend[i];
        ++phase_count[i % period];
    }
    std::vector<double> phase_mean(static_cast<std::size_t>(period));
    double grand = 0.0;
    for (std::size_t p = 0; p < phase_mean.size(); ++p) {
        phase_mean[p] = phase_sum[p] / static_cast<double>(phase_count[p]);
        grand += phase_mean[p];
    }
    grand /= period;
    for (auto& m : phase_mean)
        m -= grand;

    std::vector<double> seasonal(n);
    std::vector<double> residual(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        seasonal[i] = phase_mean[i % period];
        if (!undefined[i])
            residual[i] = x[i] - trend[i] - seasonal[i];
    }

    DecomposedSeries out;
    out.observed = series;
    out.trend = series.with_values(std::move(trend), undefined);
    out.seasonal = series.with_values(std::move(seasonal));
    out.residual = series.with_values(std::move(residual), std::move(undefined));
    out.period = period;
    out.parent_length = n;
    return out;
}

std::vector<int> detection_phases(const HourlySeries& series, const OutlierOptions& options) {
    std::vector<int> phase(series.size());
    const bool local = options.period == 24 && !options.timezone.empty();
    std::optional<CivilClock> clock;
    if (local)
        clock.emplace(options.timezone);
    for (std::size_t i = 0; i < series.size(); ++i)
        phase[i] = local ? clock->local_hour(series.time_at(i))
                         : static_cast<int>(i % static_cast<std::size_t>(std::max(options.period, 1)));
    return phase;
}

std::vector<double> detection_residual(std::span<const double> values, const OutlierOptions& options,
                                       std::span<const int> phase_of) {
    const std::size_t n = values.size();
    if (options.period <= 1) {
        const auto smooth = savgol_smooth(values, options.window, options.polyorder);
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i)
            r[i] = values[i] - smooth[i];
        return r;
    }

    const auto period = static_cast<std::size_t>(options.period);
    if (n < 2 * period)
        throw ParameterError("detect_outliers: series shorter than two periods");

    // Local level: centred moving average over one period, held flat at the ends.
    const std::size_t h = period / 2;
    const bool even = period % 2 == 0;
    std::vector<double> level(n);
    for (std::size_t i = h; i + h < n; ++i) {
        double acc = 0.0;
        if (even) {
            acc = 0.5 * values[i - h] + 0.5 * values[i + h];
            for (std::size_t j = i - h + 1; j < i + h; ++j)
                acc += values[j];
        } else {
            for (std::size_t j = i - h; j <= i + h; ++j)
                acc += values[j];
        }
        level[i] = acc / static_cast<double>(period);
    }
    for (std::size_t i = 0; i < h; ++i)
        level[i] = level[h];
    for (std::size_t i = n - h; i < n; ++i)
        level[i] = level[n - h - 1];

    std::vector<double> detrended(n);
    for (std::size_t i = 0; i < n; ++i)
        detrended[i] = values[i] - level[i];

    if (!phase_of.empty() && phase_of.size() != n)
        throw ParameterError("detect_outliers: phase labels do not match the series length");
    std::vector<std::vector<std::size_t>> members(period);
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = phase_of.empty() ? i % period : static_cast<std::size_t>(phase_of[i]);
        if (p >= period)
            throw ParameterError("detect_outliers: phase label out of range");
        members[p].push_back(i);
    }

    std::vector<double> residual(n);
    std::vector<double> phase;
    for (const auto& idx : members) {
        if (idx.empty())
            continue;
        phase.clear();
        for (auto i : idx)
            phase.push_back(detrended[i]);
        if (phase.size() < static_cast<std::size_t>(options.window))
            throw ParameterError("detect_outliers: too few periods for the smoothing window");
        const auto smooth = savgol_smooth(phase, options.window, options.polyorder);
        for (std::size_t k = 0; k < idx.size(); ++k)
            residual[idx[k]] = phase[k] - smooth[k];
    }
    return residual;
}

std::vector<double> rolling_robust_scale(std::span<const double> values, int window) {
    if (window < 3 || window % 2 == 0)
        throw ParameterError("robust scale window must be an odd integer >= 3");
    const std::size_t n = values.size();
    const auto w = std::min<std::size_t>(static_cast<std::size_t>(window), n);
    const std::size_t h = w / 2;
    std::vector<double> out(n);
    std::vector<double> buf(w);
    std::vector<double> dev(w);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t lo = i >= h ? i - h : 0;
        lo = std::min(lo, n - w);
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(lo), w, buf.begin());
        const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(w / 2);
        std::nth_element(buf.begin(), mid, buf.end());
        const double median = *mid;
        for (std::size_t k = 0; k < w; ++k)
            dev[k] = std::abs(values[lo + k] - median);
        const auto dmid = dev.begin() + static_cast<std::ptrdiff_t>(w / 2);
        std::nth_element(dev.begin(), dmid, dev.end());
        out[i] = 1.4826 * *dmid;
    }
    return out;
}

double bonferroni_threshold(double alpha, std::size_t n, double dof) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ParameterError("alpha must lie in (0, 1)");
    if (n == 0)
        throw ParameterError("bonferroni_threshold: n must be positive");
    if (!(dof > 0.0))
        throw ParameterError("bonferroni_threshold: degrees of freedom must be positive");
    const boost::math::students_t dist(dof);
    const double tail = alpha / (2.0 * static_cast<double>(n));
    return boost::math::quantile(boost::math::complement(dist, tail));
}

OutlierReport detect_outliers(const HourlySeries& series, const OutlierOptions& options) {
    if (!(options.alpha > 0.0 && options.alpha < 1.0))
        throw ParameterError("detect_outliers: alpha must lie in (0, 1)");
    check_savgol(options.period > 1 ? series.size() / static_cast<std::size_t>(options.period) : series.size(),
                 options.window, options.polyorder);

    const auto filled = interpolate_missing(series);
    const auto phases = options.period > 1 ? detection_phases(series, options) : std::vector<int>{};
    const auto residual = detection_residual(filled.values(), options, phases);
    const auto scale = rolling_robust_scale(residual, options.scale_window);
    // residuals at rounding level are not evidence of anything
    double magnitude = 1.0;
    for (double v : filled.values())
        magnitude = std::max(magnitude, std::abs(v));
    const double tol = 1e-9 * magnitude;

    OutlierReport report;
    report.alpha = options.alpha;
    report.threshold = bonferroni_threshold(options.alpha, series.size(), options.scale_window - 1.0);
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series.missing(i))
            continue;
        double stat = 0.0;
        if (std::abs(residual[i]) > tol)
            stat = std::abs(residual[i]) / std::max(scale[i], tol);
        const bool negative = series.unit() == Unit::kWh && series[i] < 0.0;
        if (stat > report.threshold) {
            report.indices.push_back(i);
            report.statistic.push_back(stat);
        } else if (negative) {
            report.indices.push_back(i);
            report.statistic.push_back(std::numeric_limits<double>::infinity());
        }
    }
    return report;
}

HourlySeries interpolate_missing(const HourlySeries& series) {
    const std::size_t n = series.size();
    if (series.missing_count() == n)
        throw InputError("interpolate_missing: series has no observed values");
    std::vector<double> v(series.values().begin(), series.values().end());
    std::size_t i = 0;
    while (i < n) {
        if (!series.missing(i)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && series.missing(j))
            ++j;
        if (i == 0) {
            for (std::size_t k = 0; k < j; ++k)
                v[k] = v[j];
        } else if (j == n) {
            for (std::size_t k = i; k < n; ++k)
                v[k] = v[i - 1];
        } else {
            const double a = v[i - 1];
            const double b = v[j];
            const double span = static_cast<double>(j - i + 1);
            for (std::size_t k = i; k < j; ++k)
                v[k] = a + (b - a) * static_cast<double>(k - i + 1) / span;
        }
        i = j;
    }
    return series.with_values(std::move(v));
}

HourlySeries repair_outliers(const HourlySeries& series, const OutlierReport& report, int period) {
    const std::size_t n = series.size();
    std::vector<std::uint8_t> replace(series.missing_mask().begin(), series.missing_mask().end());
    for (auto i : report.indices) {
        if (i >= n)
            throw ParameterError("repair_outliers: flagged index out of range");
        replace[i] = 1;
    }
    if (std::find(replace.begin(), replace.end(), std::uint8_t{1}) == replace.end())
        return series;

    const auto provisional = interpolate_missing(series.with_values(
        std::vector<double>(series.values().begin(), series.values().end()), replace));
    const auto parts = seasonal_decompose(provisional, period);

    std::size_t first_defined = 0;
    while (parts.trend.missing(first_defined))
        ++first_defined;
    std::size_t last_defined = n - 1;
    while (parts.trend.missing(last_defined))
        --last_defined;

    std::vector<double> out(series.values().begin(), series.values().end());
    for (std::size_t i = 0; i < n; ++i) {
        if (!replace[i])
            continue;
        const std::size_t t = std::clamp(i, first_defined, last_defined);
        double v = parts.trend[t] + parts.seasonal[i];
        if (series.unit() == Unit::kWh)
            v = std::max(v, 0.0);
        out[i] = v;
    }
    return series.with_values(std::move(out));
}

CleanResult clean_series(const HourlySeries& series, const OutlierOptions& options) {
    CleanResult result;
    result.report = detect_outliers(series, options);
    result.repaired = repair_outliers(series, result.report, options.period > 1 ? options.period : 24);
    return result;
}

} // namespace scalocast::prep
