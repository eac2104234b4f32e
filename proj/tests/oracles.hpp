#pragma once

// Straightforward reference implementations used as test oracles. They share
// no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v)
        x = d(rng);
    return v;
}

// Wavelets written out from their closed forms.
inline double mexh(double t) {
    return 2.0 / (std::sqrt(3.0) * std::pow(std::numbers::pi, 0.25)) * (1 - t * t) * std::exp(-t * t / 2);
}
inline double morl(double t) { return std::exp(-t * t / 2) * std::cos(5 * t); }
inline double gaus1(double t) {
    // -d/dt e^{-t²} normalised: C·(-(-2t)) with C = (2^{1/2} Γ(3/2))^{-1/2}
    const double c = 1.0 / std::sqrt(std::sqrt(2.0) * std::tgamma(1.5));
    return -2.0 * t * std::exp(-t * t) * c;
}
inline double gaus8(double t) {
    // H8 physicists' polynomial: d⁸/dt⁸ e^{-t²} = H8(t) e^{-t²}
    const double t2 = t * t;
    const double h8 = 256 * t2 * t2 * t2 * t2 - 3584 * t2 * t2 * t2 + 13440 * t2 * t2 - 13440 * t2 + 1680;
    const double c = 1.0 / std::sqrt(std::pow(2.0, 7.5) * std::tgamma(8.5));
    return h8 * std::exp(-t2) * c;
}

// coefficient(a, τ) = a^{-1/2} Σ_t x[t] ψ((t − τ)/a), |(t − τ)/a| ≤ 8, zero outside the signal.
inline std::vector<std::vector<double>> cwt_direct(const std::vector<double>& x, const std::vector<double>& scales,
                                                   const std::function<double(double)>& psi) {
    std::vector<std::vector<double>> out;
    const int n = static_cast<int>(x.size());
    for (double a : scales) {
        std::vector<double> row(x.size(), 0.0);
        for (int tau = 0; tau < n; ++tau) {
            double acc = 0.0;
            for (int t = 0; t < n; ++t) {
                const double u = (t - tau) / a;
                if (std::abs(u) <= 8.0)
                    acc += x[static_cast<std::size_t>(t)] * psi(u);
            }
            row[static_cast<std::size_t>(tau)] = acc / std::sqrt(a);
        }
        out.push_back(row);
    }
    return out;
}

// Gaussian elimination with partial pivoting on a dense system.
inline std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[p][k]))
                p = i;
        std::swap(a[k], a[p]);
        std::swap(b[k], b[p]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j)
                a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j)
            s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

// Value at `at` (offset from the window start) of the degree-p polynomial
// least-squares fit to y over positions 0..w-1, via the normal equations.
inline double poly_fit_at(const std::vector<double>& y, int p, double at) {
    const std::size_t m = static_cast<std::size_t>(p + 1);
    const double c = (static_cast<double>(y.size()) - 1) / 2; // centre for conditioning
    std::vector<std::vector<double>> ata(m, std::vector<double>(m, 0.0));
    std::vector<double> aty(m, 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double u = static_cast<double>(i) - c;
        for (std::size_t r = 0; r < m; ++r) {
            aty[r] += std::pow(u, static_cast<double>(r)) * y[i];
            for (std::size_t s = 0; s < m; ++s)
                ata[r][s] += std::pow(u, static_cast<double>(r + s));
        }
    }
    const auto coef = solve(ata, aty);
    double v = 0.0;
    for (std::size_t r = 0; r < m; ++r)
        v += coef[r] * std::pow(at - c, static_cast<double>(r));
    return v;
}

// Savitzky-Golay by an explicit fit per window; edges use the nearest full window.
inline std::vector<double> savgol(const std::vector<double>& x, int window, int polyorder) {
    const int n = static_cast<int>(x.size());
    const int half = window / 2;
    std::vector<double> out(x.size());
    for (int i = 0; i < n; ++i) {
        const int start = std::clamp(i - half, 0, n - window);
        std::vector<double> y(x.begin() + start, x.begin() + start + window);
        out[static_cast<std::size_t>(i)] = poly_fit_at(y, polyorder, i - start);
    }
    return out;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = mean(x), my = mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// Two-sided exact signed-rank p-value by enumerating all 2^n sign patterns.
// Ties get average ranks; zero differences are dropped.
inline double wilcoxon_bruteforce(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i])
            d.push_back(a[i] - b[i]);
    const std::size_t n = d.size();
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        double less = 0, equal = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(d[j]) < std::abs(d[i]))
                ++less;
            else if (std::abs(d[j]) == std::abs(d[i]))
                ++equal;
        }
        rank[i] = less + (equal + 1) / 2;
    }
    double total = 0, w = 0;
    for (std::size_t i = 0; i < n; ++i) {
        total += rank[i];
        if (d[i] > 0)
            w += rank[i];
    }
    const double dev = std::abs(w - total / 2);
    std::size_t extreme = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1)
                s += rank[i];
        if (std::abs(s - total / 2) >= dev - 1e-9)
            ++extreme;
    }
    return std::min(1.0, static_cast<double>(extreme) / static_cast<double>(std::uint64_t{1} << n));
}

// Student-t upper quantile by Simpson integration of the density and bisection.
inline double t_quantile(double p, double dof) {
    const double c = std::exp(std::lgamma((dof + 1) / 2) - std::lgamma(dof / 2)) / std::sqrt(dof * std::numbers::pi);
    auto pdf = [&](double t) { return c * std::pow(1 + t * t / dof, -(dof + 1) / 2); };
    auto cdf = [&](double x) {
        const int n = 20000;
        const double h = x / n;
        double s = pdf(0) + pdf(x);
        for (int i = 1; i < n; ++i)
            s += pdf(i * h) * (i % 2 ? 4 : 2);
        return 0.5 + s * h / 3;
    };
    double lo = 0, hi = 50;
    for (int it = 0; it < 100; ++it) {
        const double mid = (lo + hi) / 2;
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return (lo + hi) / 2;
}

} // namespace oracle
