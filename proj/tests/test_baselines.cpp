#include "oracles.hpp"

#include "scalocast/baselines.hpp"
#include "scalocast/error.hpp"

#include <doctest.h>

using namespace scalocast;
using namespace scalocast::baselines;
using features::SampleWindow;

namespace {

SampleWindow window(std::vector<std::pair<std::string, std::vector<double>>> channels, std::vector<double> target) {
    SampleWindow s;
    s.forecast_date = parse_date("2020-01-01");
    for (auto& [name, v] : channels) {
        features::Channel c{name, {}};
        std::copy(v.begin(), v.end(), c.values.begin());
        s.channels.push_back(c);
    }
    std::copy(target.begin(), target.end(), s.target.begin());
    s.has_target = true;
    s.meter_count.fill(1);
    return s;
}

} // namespace

TEST_CASE("seasonal naive") {
    std::vector<double> ramp(24), other(24, 7.0);
    for (std::size_t k = 0; k < 24; ++k)
        ramp[k] = static_cast<double>(k);
    const auto s = window({{"c24", ramp}, {"c168", other}}, ramp);
    const auto p24 = seasonal_naive(s, 24);
    const auto p168 = seasonal_naive(s, 168);
    for (std::size_t k = 0; k < 24; ++k) {
        CHECK(p24[k] == ramp[k]);
        CHECK(p168[k] == 7.0);
    }
    // a daily-periodic series is forecast exactly by the lag-24 copy
    CHECK(std::equal(p24.begin(), p24.end(), s.target.begin()));
    const auto hl = window({{"holiday_lag", other}}, ramp);
    CHECK(seasonal_naive(hl, 168)[0] == 7.0);
    CHECK_THROWS_AS(seasonal_naive(hl, 24), ContractError);
}

TEST_CASE("linear baseline") {
    std::mt19937_64 rng(31);
    SUBCASE("exact recovery of an affine map") {
        std::vector<SampleWindow> train;
        std::vector<std::vector<double>> coef(24);
        for (auto& c : coef)
            c = oracle::random_vector(rng, 24, -0.5, 0.5);
        for (int n = 0; n < 80; ++n) {
            const auto x = oracle::random_vector(rng, 24, 0, 10);
            std::vector<double> y(24);
            for (std::size_t h = 0; h < 24; ++h) {
                y[h] = 3.0 + 0.1 * static_cast<double>(h);
                for (std::size_t k = 0; k < 24; ++k)
                    y[h] += coef[h][k] * x[k];
            }
            train.push_back(window({{"c24", x}}, y));
        }
        const auto params = fit_linear_baseline(train);
        CHECK_FALSE(params.ridge_fallback);
        for (const auto& s : train) {
            const auto p = predict_linear(params, s);
            for (std::size_t h = 0; h < 24; ++h)
                CHECK(std::abs(p[h] - s.target[h]) < 1e-6);
        }
    }
    SUBCASE("constant regressors predict the training mean") {
        std::vector<SampleWindow> train;
        std::vector<double> mean(24, 0.0);
        for (int n = 0; n < 10; ++n) {
            const auto y = oracle::random_vector(rng, 24, 0, 5);
            for (std::size_t h = 0; h < 24; ++h)
                mean[h] += y[h] / 10;
            train.push_back(window({{"holiday_cat", std::vector<double>(24, 0.0)}}, y));
        }
        const auto params = fit_linear_baseline(train);
        const auto p = predict_linear(params, train[0]);
        for (std::size_t h = 0; h < 24; ++h)
            CHECK(std::abs(p[h] - mean[h]) < 1e-6);
    }
    SUBCASE("noisy fit matches the raw-unit normal equations") {
        std::vector<SampleWindow> train;
        std::vector<std::vector<double>> rows;
        std::vector<std::vector<double>> ys(24);
        for (int n = 0; n < 120; ++n) {
            const auto a = oracle::random_vector(rng, 24, 0, 10);
            const auto b = oracle::random_vector(rng, 24, -5, 5);
            const auto y = oracle::random_vector(rng, 24, 20, 40);
            train.push_back(window({{"c24", a}, {"t_amb", b}}, y));
            std::vector<double> row{1.0};
            row.insert(row.end(), a.begin(), a.end());
            row.insert(row.end(), b.begin(), b.end());
            rows.push_back(row);
            for (std::size_t h = 0; h < 24; ++h)
                ys[h].push_back(y[h]);
        }
        const std::size_t m = rows[0].size();
        std::vector<std::vector<double>> xtx(m, std::vector<double>(m, 0.0));
        for (const auto& r : rows)
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    xtx[i][j] += r[i] * r[j];
        const auto params = fit_linear_baseline(train);
        for (std::size_t h = 0; h < 24; h += 5) {
            std::vector<double> xty(m, 0.0);
            for (std::size_t n = 0; n < rows.size(); ++n)
                for (std::size_t i = 0; i < m; ++i)
                    xty[i] += rows[n][i] * ys[h][n];
            const auto beta = oracle::solve(xtx, xty);
            for (std::size_t n = 0; n < rows.size(); n += 17) {
                double want = 0;
                for (std::size_t i = 0; i < m; ++i)
                    want += beta[i] * rows[n][i];
                CHECK(std::abs(predict_linear(params, train[n])[h] - want) < 1e-5);
            }
        }
        // the fit never does worse in-sample than the lag-24 copy
        double mse_lin = 0, mse_naive = 0;
        for (const auto& s : train) {
            const auto p = predict_linear(params, s);
            const auto q = seasonal_naive(s, 24);
            for (std::size_t h = 0; h < 24; ++h) {
                mse_lin += (p[h] - s.target[h]) * (p[h] - s.target[h]);
                mse_naive += (q[h] - s.target[h]) * (q[h] - s.target[h]);
            }
        }
        CHECK(mse_lin <= mse_naive);
    }
    SUBCASE("too few samples") {
        std::vector<SampleWindow> one{window({{"c24", std::vector<double>(24, 1.0)}}, std::vector<double>(24, 1.0))};
        CHECK_THROWS_AS(fit_linear_baseline(one), ParameterError);
    }
}
