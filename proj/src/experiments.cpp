#include "scalocast/experiments.hpp"

#include "scalocast/csv.hpp"
#include "scalocast/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>

namespace scalocast::experiments {

using nlohmann::json;

PairwiseTest compare_pair(const VariantRun& a, const VariantRun& b) {
    PairwiseTest t{a.name, b.name, 0, std::nullopt};
    const auto& ra = a.run.report;
    const auto& rb = b.run.report;
    std::vector<double> xa, xb;
    // pair on dates; both reports are chronological
    std::size_t i = 0, j = 0;
    while (i < ra.count() && j < rb.count()) {
        const auto da = std::chrono::sys_days(ra.days[i]);
        const auto db = std::chrono::sys_days(rb.days[j]);
        if (da < db) {
            ++i;
        } else if (db < da) {
            ++j;
        } else {
            xa.push_back(ra.mae[i++]);
            xb.push_back(rb.mae[j++]);
        }
    }
    t.days = xa.size();
    if (xa.empty())
        return t;
    try {
        t.result = stats::wilcoxon_signed_rank(xa, xb);
    } catch (const UndefinedStatistic&) {
    }
    return t;
}

ComparativeReport rank_variants(std::vector<VariantRun> variants) {
    ComparativeReport r;
    r.variants = std::move(variants);
    r.ranking.resize(r.variants.size());
    std::iota(r.ranking.begin(), r.ranking.end(), std::size_t{0});
    std::stable_sort(r.ranking.begin(), r.ranking.end(), [&](std::size_t x, std::size_t y) {
        return r.variants[x].run.report.mae_summary().mean < r.variants[y].run.report.mae_summary().mean;
    });
    for (std::size_t i = 0; i < r.variants.size(); ++i)
        for (std::size_t k = i + 1; k < r.variants.size(); ++k)
            r.tests.push_back(compare_pair(r.variants[i], r.variants[k]));
    return r;
}

ComparativeReport run_variants(const ExperimentConfig& config, const features::Dataset& dataset,
                               const nn::EpochCallback& on_epoch) {
    if (config.variants.empty())
        throw ConfigError("experiment needs at least one entry in 'variants'");
    std::vector<VariantRun> runs;
    for (const auto& v : config.variants) {
        ExperimentConfig c = config;
        c.name = v.name;
        c.features = v.features;
        runs.push_back({v.name, v.features, forecast::run_experiment(c, dataset, on_epoch)});
    }
    return rank_variants(std::move(runs));
}

void write_report(const ComparativeReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream rank(dir / "ranking.csv", std::ios::binary);
    rank << "rank,variant,days,mae_mean,mae_std,mape_mean,mape_std,mse_mean,mse_std\n";
    json rows = json::array();
    for (std::size_t r = 0; r < report.ranking.size(); ++r) {
        const auto& v = report.variants[report.ranking[r]];
        const auto mae = v.run.report.mae_summary();
        const auto mape = v.run.report.mape_summary();
        const auto mse = v.run.report.mse_summary();
        rank << r + 1 << ',' << v.name << ',' << v.run.report.count() << ',' << format_double(mae.mean) << ','
             << format_double(mae.std) << ',' << format_double(mape.mean) << ',' << format_double(mape.std) << ','
             << format_double(mse.mean) << ',' << format_double(mse.std) << '\n';
        rows.push_back({{"rank", r + 1},
                        {"variant", v.name},
                        {"features", v.features},
                        {"days", v.run.report.count()},
                        {"mae", {{"mean", mae.mean}, {"std", mae.std}}},
                        {"mape", {{"mean", mape.mean}, {"std", mape.std}}},
                        {"mse", {{"mean", mse.mean}, {"std", mse.std}}}});
    }
    std::ofstream wil(dir / "wilcoxon.csv", std::ios::binary);
    wil << "a,b,days,n,statistic,p_value\n";
    json tests = json::array();
    for (const auto& t : report.tests) {
        json j = {{"a", t.a}, {"b", t.b}, {"days", t.days}};
        wil << t.a << ',' << t.b << ',' << t.days << ',';
        if (t.result) {
            wil << t.result->n << ',' << format_double(t.result->statistic) << ',' << format_double(t.result->p_value);
            j["n"] = t.result->n;
            j["statistic"] = t.result->statistic;
            j["p_value"] = t.result->p_value;
            j["exact"] = t.result->exact;
        } else {
            wil << ",,";
            j["p_value"] = nullptr;
        }
        wil << '\n';
        tests.push_back(j);
    }
    std::ofstream js(dir / "report.json", std::ios::binary);
    js << json{{"ranking", rows}, {"wilcoxon", tests}}.dump(2) << '\n';
    if (!rank || !wil || !js)
        throw InputError("cannot write experiment report in " + dir.string());
    for (const auto& v : report.variants)
        forecast::write_run(v.run, dir / v.name);
}

} // namespace scalocast::experiments
