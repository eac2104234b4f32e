#include "oracles.hpp"

#include "scalocast/error.hpp"
#include "scalocast/stats.hpp"

#include <doctest.h>

#include <numbers>

using namespace scalocast;
using namespace scalocast::stats;

TEST_CASE("metrics") {
    SUBCASE("perfect forecast") {
        const std::vector<double> y{1, 2, 3};
        const auto m = metrics(y, y);
        CHECK(m.mae == 0.0);
        CHECK(m.mape == 0.0);
        CHECK(m.mse == 0.0);
    }
    SUBCASE("hand example") {
        const auto m = metrics(std::vector<double>{100, 200}, std::vector<double>{110, 180});
        CHECK(m.mae == 15.0);
        CHECK(m.mape == 10.0);
        CHECK(m.mse == 250.0);
    }
    SUBCASE("random vectors vs direct sums, power-mean bound") {
        std::mt19937_64 rng(9);
        for (int rep = 0; rep < 20; ++rep) {
            const auto y = oracle::random_vector(rng, 24, 1, 50);
            const auto p = oracle::random_vector(rng, 24, 1, 50);
            double mae = 0, mape = 0, mse = 0;
            for (std::size_t i = 0; i < 24; ++i) {
                mae += std::abs(y[i] - p[i]);
                mape += std::abs(y[i] - p[i]) / std::abs(y[i]);
                mse += (y[i] - p[i]) * (y[i] - p[i]);
            }
            const auto m = metrics(y, p);
            CHECK(std::abs(m.mae - mae / 24) < 1e-12);
            CHECK(std::abs(m.mape - 100 * mape / 24) < 1e-12);
            CHECK(std::abs(m.mse - mse / 24) < 1e-12);
            CHECK(m.mse >= m.mae * m.mae);
        }
    }
    SUBCASE("zero actuals are excluded from MAPE and counted") {
        const auto m = metrics(std::vector<double>{0, 100}, std::vector<double>{5, 90});
        CHECK(m.mape_excluded == 1);
        CHECK(m.mape == 10.0);
        CHECK(m.mae == 7.5);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(metrics(std::vector<double>{}, std::vector<double>{}), ParameterError);
        CHECK_THROWS_AS(metrics(std::vector<double>{1}, std::vector<double>{1, 2}), ParameterError);
    }
}

TEST_CASE("metrics report aggregates") {
    MetricsReport r;
    r.add(parse_date("2020-01-01"), {1, 10, 2, 0});
    r.add(parse_date("2020-01-02"), {3, 30, 10, 0});
    CHECK(r.mae_summary().mean == 2.0);
    CHECK(r.mae_summary().std == doctest::Approx(std::sqrt(2.0)));
    CHECK(r.mape_summary().mean == 20.0);
    const std::size_t idx[] = {1};
    CHECK(r.subset(idx).mae == std::vector<double>{3});
    CHECK(median({3, 1, 2, 10}) == 2.5);
}

TEST_CASE("spearman") {
    CHECK(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{10, 20, 30}) == 1.0);
    CHECK(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{30, 20, 10}) == -1.0);
    CHECK_THROWS_AS(spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), UndefinedStatistic);
    CHECK(average_ranks(std::vector<double>{5, 1, 5, 2}) == std::vector<double>{3.5, 1, 3.5, 2});

    std::mt19937_64 rng(4);
    const auto x = oracle::random_vector(rng, 200, 0.1, 3);
    const auto y = oracle::random_vector(rng, 200, 0.1, 3);
    std::vector<double> ex(200), cube(200);
    for (std::size_t i = 0; i < 200; ++i) {
        ex[i] = std::exp(x[i]);
        cube[i] = y[i] * y[i] * y[i];
    }
    const double base = spearman(x, y);
    CHECK(std::abs(spearman(ex, cube) - base) < 1e-12);
    const auto rx = average_ranks(x), ry = average_ranks(y);
    CHECK(std::abs(base - oracle::pearson(rx, ry)) < 1e-12);
}

TEST_CASE("wilcoxon signed rank") {
    SUBCASE("n = 3 exact") {
        const auto r = wilcoxon_signed_rank(std::vector<double>{1, 2, 3}, std::vector<double>{0, 0, 0});
        CHECK(r.p_value == 0.25);
        CHECK(r.exact);
        CHECK(r.statistic == 6.0);
    }
    SUBCASE("all zero differences") {
        const std::vector<double> a{1, 2, 3};
        CHECK_THROWS_AS(wilcoxon_signed_rank(a, a), UndefinedStatistic);
    }
    SUBCASE("exact matches sign enumeration, with and without ties") {
        std::mt19937_64 rng(12);
        for (int rep = 0; rep < 10; ++rep) {
            const std::size_t n = 4 + static_cast<std::size_t>(rep % 9);
            auto a = oracle::random_vector(rng, n, 0, 10);
            auto b = oracle::random_vector(rng, n, 0, 10);
            if (rep % 2) // integer values give tied |differences| and zeros
                for (std::size_t i = 0; i < n; ++i) {
                    a[i] = std::round(a[i] / 3);
                    b[i] = std::round(b[i] / 3);
                }
            if (std::equal(a.begin(), a.end(), b.begin()))
                continue;
            const auto r = wilcoxon_signed_rank(a, b);
            CHECK(r.p_value == doctest::Approx(oracle::wilcoxon_bruteforce(a, b)).epsilon(1e-12));
            CHECK(r.p_value == wilcoxon_signed_rank(b, a).p_value);
        }
        const auto a = oracle::random_vector(rng, 12, 0, 1), b = oracle::random_vector(rng, 12, 0, 1);
        CHECK(wilcoxon_signed_rank(a, b).p_value == oracle::wilcoxon_bruteforce(a, b));
    }
    SUBCASE("normal approximation for large n") {
        std::mt19937_64 rng(2);
        const auto a = oracle::random_vector(rng, 200, 0, 1);
        std::vector<double> b(a);
        for (auto& v : b)
            v += 0.3;
        const auto r = wilcoxon_signed_rank(a, b);
        CHECK_FALSE(r.exact);
        CHECK(r.p_value < 1e-10);
        const auto c = oracle::random_vector(rng, 200, 0, 1);
        const auto null = wilcoxon_signed_rank(a, c);
        CHECK(null.p_value > 0.0);
        CHECK(null.p_value <= 1.0);
    }
}

TEST_CASE("lag correlogram") {
    const Hour t0 = parse_timestamp("2020-01-01T00:00:00Z");
    SUBCASE("daily periodic series") {
        std::vector<double> v(24 * 30);
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = std::sin(2 * std::numbers::pi * static_cast<double>(i % 24) / 24) + 0.1 * static_cast<double>(i % 24);
        const std::vector<int> lags{24, 48, 168};
        for (double r : lag_correlogram(HourlySeries(t0, v, Unit::kWh), lags))
            CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("iid noise") {
        std::mt19937_64 rng(5);
        const auto v = oracle::random_vector(rng, 10000);
        const std::vector<int> lags{24};
        CHECK(std::abs(lag_correlogram(HourlySeries(t0, v, Unit::kWh), lags)[0]) < 0.05);
    }
    SUBCASE("weekly sinusoid peaks at multiples of 168") {
        std::vector<double> v(24 * 7 * 8);
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = std::sin(2 * std::numbers::pi * static_cast<double>(i) / 168);
        std::vector<int> lags;
        for (int d = 1; d <= 28; ++d)
            lags.push_back(24 * d);
        const auto r = lag_correlogram(HourlySeries(t0, v, Unit::kWh), lags);
        for (std::size_t i = 1; i + 1 < r.size(); ++i) {
            const bool peak = r[i] > r[i - 1] && r[i] > r[i + 1];
            CHECK(peak == ((i + 1) % 7 == 0));
        }
    }
}

TEST_CASE("component correlations") {
    const Hour t0 = parse_timestamp("2020-01-01T00:00:00Z");
    std::mt19937_64 rng(10);
    const auto noise_a = oracle::random_vector(rng, 24 * 60, -1, 1);
    const auto noise_b = oracle::random_vector(rng, 24 * 60, -1, 1);
    std::vector<double> d(24 * 60), w(24 * 60);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double trend = 0.01 * static_cast<double>(i);
        const double daily = std::sin(2 * std::numbers::pi * static_cast<double>(i % 24) / 24);
        d[i] = trend + daily + 0.2 * noise_a[i];
        w[i] = -(trend + daily + 0.2 * noise_a[i]);
    }
    const auto cd = prep::seasonal_decompose(HourlySeries(t0, d, Unit::kWh), 24);
    const auto cw = prep::seasonal_decompose(HourlySeries(t0, w, Unit::Celsius), 24);
    const auto neg = component_correlations(cd, cw);
    CHECK(neg.raw == doctest::Approx(-1.0));
    CHECK(neg.trend == doctest::Approx(-1.0));
    CHECK(neg.seasonal == doctest::Approx(-1.0));
    CHECK(neg.residual == doctest::Approx(-1.0));

    for (std::size_t i = 0; i < d.size(); ++i)
        w[i] = 0.01 * static_cast<double>(i) + 0.2 * noise_b[i];
    const auto ci = component_correlations(cd, prep::seasonal_decompose(HourlySeries(t0, w, Unit::Celsius), 24));
    CHECK(ci.trend > 0.95);
    CHECK(std::abs(ci.residual) < 0.1);
}

TEST_CASE("stratification") {
    const auto dk = danish_holidays(2019, 2020);
    CHECK_FALSE(dissimilar_transition(parse_date("2019-11-12"), dk)); // Tuesday
    CHECK(dissimilar_transition(parse_date("2019-11-16"), dk));       // Saturday
    CHECK(dissimilar_transition(parse_date("2019-12-25"), dk));       // Wednesday holiday
    CHECK(day_type(parse_date("2019-12-25"), dk) == DayType::NonWorking);

    MetricsReport r;
    for (int d = 1; d <= 31; ++d)
        r.add(Date{std::chrono::year{2019}, std::chrono::December, std::chrono::day{static_cast<unsigned>(d)}},
              {static_cast<double>(d), 1.0, 1.0, 0});
    const auto s = stratify_days(r, dk);
    for (const char* axis : {"holiday", "transition"}) {
        std::size_t total = 0;
        for (const auto& [label, rep] : s.axes.at(axis))
            total += rep.count();
        CHECK(total == 31);
    }
    CHECK(s.axes.at("holiday").at("holiday").count() == 2);
    CHECK(s.axes.at("named_holiday").at("Juledag").mae == std::vector<double>{25});
}
