#include "oracles.hpp"

#include "scalocast/civil_clock.hpp"
#include "scalocast/csv.hpp"
#include "scalocast/error.hpp"
#include "scalocast/series.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace scalocast;
using namespace std::chrono;

namespace {

const Hour t0 = parse_timestamp("2019-01-01T00:00:00Z");

HourlySeries ramp_series(std::vector<double> v) { return HourlySeries(t0, std::move(v), Unit::kWh); }

std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("scalocast_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("timestamps parse to UTC hours and round-trip") {
    CHECK(format_timestamp(parse_timestamp("2019-03-31T02:00:00+02:00")) == "2019-03-31T00:00:00Z");
    CHECK(parse_timestamp("2019-03-31 00:00") == parse_timestamp("2019-03-31T00:00:00Z"));
    CHECK_THROWS_AS(parse_timestamp("2019-03-31T00:30:00Z"), InputError);
    CHECK(format_date(parse_date("2019-12-25")) == "2019-12-25");
}

TEST_CASE("diff_cumulative") {
    SUBCASE("hand example") {
        const auto r = diff_cumulative(ramp_series({10, 12, 15, 15}));
        REQUIRE(r.consumption.size() == 3);
        CHECK(r.consumption[0] == 2);
        CHECK(r.consumption[1] == 3);
        CHECK(r.consumption[2] == 0);
        CHECK(r.negative_indices.empty());
        CHECK(r.consumption.start() == t0);
    }
    SUBCASE("meter reset is masked and reported") {
        const auto r = diff_cumulative(ramp_series({10, 5}));
        REQUIRE(r.consumption.size() == 1);
        CHECK(r.consumption.missing(0));
        CHECK(r.negative_indices == std::vector<std::size_t>{0});
    }
    SUBCASE("too short") { CHECK_THROWS_AS(diff_cumulative(ramp_series({1})), InputError); }
    SUBCASE("random monotone series vs pairwise subtraction") {
        std::mt19937_64 rng(3);
        auto inc = oracle::random_vector(rng, 500, 0.0, 5.0);
        std::vector<double> cum{100.0};
        for (double d : inc)
            cum.push_back(cum.back() + d);
        const auto r = diff_cumulative(ramp_series(cum));
        REQUIRE(r.consumption.size() == cum.size() - 1);
        for (std::size_t i = 0; i + 1 < cum.size(); ++i)
            CHECK(r.consumption[i] == cum[i + 1] - cum[i]);
    }
    SUBCASE("inverse of cumulative sum") {
        std::vector<double> x{0.5, 1.5, 0.0, 2.25, 3.0};
        std::vector<double> cum{0.0};
        for (double v : x)
            cum.push_back(cum.back() + v);
        const auto r = diff_cumulative(ramp_series(cum));
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(r.consumption[i] == doctest::Approx(x[i]).epsilon(1e-15));
    }
}

TEST_CASE("aggregate_district") {
    SUBCASE("two meters") {
        std::vector<HourlySeries> m{ramp_series({2, 4}), ramp_series({4, 8})};
        const auto d = aggregate_district(m);
        CHECK(d.demand[0] == 3);
        CHECK(d.demand[1] == 6);
        CHECK(d.meter_count == std::vector<int>{2, 2});
    }
    SUBCASE("masked meter hour") {
        std::vector<HourlySeries> m{HourlySeries(t0, {0, 4}, {1, 0}, Unit::kWh), ramp_series({4, 8})};
        const auto d = aggregate_district(m);
        CHECK(d.demand[0] == 4);
        CHECK(d.demand[1] == 6);
        CHECK(d.meter_count == std::vector<int>{1, 2});
    }
    SUBCASE("hour with no meter is masked") {
        std::vector<HourlySeries> m{HourlySeries(t0, {0, 4}, {1, 0}, Unit::kWh)};
        const auto d = aggregate_district(m);
        CHECK(d.demand.missing(0));
        CHECK(d.meter_count[0] == 0);
    }
    SUBCASE("100 meters vs direct mean, permutation invariance, rescale round trip") {
        std::mt19937_64 rng(11);
        std::vector<HourlySeries> meters;
        std::vector<std::vector<double>> raw;
        for (int k = 0; k < 100; ++k) {
            raw.push_back(oracle::random_vector(rng, 48, 0.0, 3.0));
            meters.push_back(ramp_series(raw.back()));
        }
        const auto d = aggregate_district(meters);
        std::vector<double> sums(48, 0.0);
        for (std::size_t i = 0; i < 48; ++i) {
            for (const auto& r : raw)
                sums[i] += r[i];
            CHECK(d.demand[i] == doctest::Approx(sums[i] / 100).epsilon(1e-12));
            CHECK(d.meter_count[i] == 100);
        }
        std::reverse(meters.begin(), meters.end());
        const auto e = aggregate_district(meters);
        for (std::size_t i = 0; i < 48; ++i)
            CHECK(e.demand[i] == doctest::Approx(d.demand[i]).epsilon(1e-14));
        const auto total = rescale_total(std::vector<double>(d.demand.values().begin(), d.demand.values().end()),
                                         std::span<const int>(d.meter_count));
        for (std::size_t i = 0; i < 48; ++i)
            CHECK(total[i] == doctest::Approx(sums[i]).epsilon(1e-12));
    }
    SUBCASE("misaligned spans are aligned onto the union") {
        std::vector<HourlySeries> m{ramp_series({1, 1}), HourlySeries(t0 + hours(1), {3, 3}, Unit::kWh)};
        const auto d = aggregate_district(m);
        REQUIRE(d.demand.size() == 3);
        CHECK(d.demand[0] == 1);
        CHECK(d.demand[1] == 2);
        CHECK(d.demand[2] == 3);
    }
}

TEST_CASE("rescale_total") {
    CHECK(rescale_total(std::vector<double>{3, 6}, 2) == std::vector<double>{6, 12});
    CHECK(rescale_total(std::vector<double>{0, 0, 0}, 7) == std::vector<double>{0, 0, 0});
    CHECK_THROWS_AS(rescale_total(std::vector<double>{1}, 0), ParameterError);
}

TEST_CASE("index arithmetic is 24 UTC hours across DST") {
    const HourlySeries s(parse_timestamp("2019-03-30T00:00:00Z"), std::vector<double>(96, 1.0), Unit::kWh);
    for (std::size_t i = 0; i + 24 < s.size(); ++i)
        CHECK(s.time_at(i + 24) - s.time_at(i) == hours(24));
    const CivilClock cph("Europe/Copenhagen");
    // 2019-03-31 has 23 local hours
    CHECK(cph.local_midnight(parse_date("2019-04-01")) - cph.local_midnight(parse_date("2019-03-31")) == hours(23));
    CHECK(cph.local_midnight(parse_date("2019-10-28")) - cph.local_midnight(parse_date("2019-10-27")) == hours(25));
    CHECK(cph.local_hour(parse_timestamp("2019-07-01T22:00:00Z")) == 0);
    CHECK(cph.local_date(parse_timestamp("2019-07-01T22:00:00Z")) == parse_date("2019-07-02"));
    CHECK_THROWS_AS(CivilClock("Not/AZone"), ConfigError);
}

TEST_CASE("series slicing and alignment") {
    const auto s = ramp_series({0, 1, 2, 3, 4});
    const auto sl = s.slice(1, 3);
    CHECK(sl.start() == t0 + hours(1));
    CHECK(sl[0] == 1);
    const auto al = s.aligned(t0 - hours(1), t0 + hours(2));
    REQUIRE(al.size() == 3);
    CHECK(al.missing(0));
    CHECK(al[1] == 0);
    CHECK(al[2] == 1);
    CHECK(s.index_of(t0 + hours(4)) == std::size_t{4});
    CHECK_FALSE(s.index_of(t0 + hours(5)).has_value());
}

TEST_CASE("holiday calendar") {
    const auto dk = danish_holidays(2018, 2019);
    CHECK(dk.contains(parse_date("2019-12-25")));
    CHECK(dk.name(parse_date("2019-12-25")) == std::optional<std::string>("Juledag"));
    CHECK_FALSE(dk.contains(parse_date("2019-12-24")));
    CHECK(dk.contains(parse_date("2019-04-21"))); // Easter Sunday 2019
    CHECK(dk.previous_occurrence("Juledag", parse_date("2019-12-25")) == parse_date("2018-12-25"));
    HolidayCalendar c;
    c.add(parse_date("2020-01-01"), "x");
    CHECK_THROWS_AS(c.add(parse_date("2020-01-01"), "y"), InputError);

    const auto dir = temp_dir("holidays");
    dk.save(dir / "h.csv");
    const auto back = HolidayCalendar::load(dir / "h.csv");
    CHECK(back.entries() == dk.entries());
}

TEST_CASE("csv readers") {
    const auto dir = temp_dir("csv");
    {
        std::ofstream os(dir / "meters.csv");
        os << "timestamp,meter_id,reading_kwh\n"
              "2019-01-01T00:00:00Z,A,10\n2019-01-01T01:00:00Z,A,12\n2019-01-01T02:00:00Z,A,15\n"
              "2019-01-01T00:00:00Z,B,100\n2019-01-01T01:00:00Z,B,104\n2019-01-01T02:00:00Z,B,90\n";
    }
    IngestReport rep;
    const auto d = ingest_meter_files({dir / "meters.csv"}, rep);
    REQUIRE(d.demand.size() == 2);
    CHECK(d.demand[0] == 3); // (2 + 4) / 2
    CHECK(d.demand[1] == 3); // B reset is masked, A alone
    CHECK(d.meter_count == std::vector<int>{2, 1});
    CHECK(rep.negative_diffs == 1);

    write_demand_csv(dir / "demand.csv", d);
    IngestReport rep2;
    const auto back = read_demand_csv(dir / "demand.csv", rep2);
    CHECK(back.meter_count == d.meter_count);
    CHECK(back.demand[0] == d.demand[0]);

    {
        std::ofstream os(dir / "weather.csv");
        os << "timestamp,t_amb,humidity\n2019-01-01T00:00:00Z,1.5,80\n2019-01-01T01:00:00Z,,81\n";
    }
    IngestReport rep3;
    const auto w = read_weather_csv(dir / "weather.csv", rep3);
    REQUIRE(w.count("t_amb"));
    CHECK(w.at("t_amb")[0] == 1.5);
    CHECK(w.at("t_amb").missing(1));
    CHECK_FALSE(w.count("humidity"));
    CHECK_FALSE(rep3.warnings.empty());
}
