#include "scalocast/checkpoint.hpp"
#include "scalocast/config.hpp"
#include "scalocast/csv.hpp"
#include "scalocast/error.hpp"
#include "scalocast/experiments.hpp"
#include "scalocast/forecaster.hpp"
#include "scalocast/manifest.hpp"
#include "scalocast/stats.hpp"
#include "scalocast/synth.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include <malloc.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

using namespace scalocast;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
    int jobs = 1;
    bool quiet = false;
};
Globals g;

void say(const std::string& msg) {
    if (!g.quiet)
        std::cerr << msg << '\n';
}

nn::EpochCallback progress(const std::string& label) {
    if (g.quiet)
        return {};
    return [label](const nn::EpochRecord& e) {
        std::fprintf(stderr, "%s epoch %d  train %.5f  val %.5f  lr %.3g  (%.1fs)\n", label.c_str(), e.epoch,
                     e.train_loss, e.val_loss, e.learning_rate, e.seconds);
    };
}

ExperimentConfig read_config(const std::string& path) {
    auto c = load_config(path);
    apply_environment(c);
    return c;
}

RunManifest manifest_for(const std::string& command, const ExperimentConfig& c) {
    RunManifest m(command, config_to_json(c), c.seed);
    m.add_input(c.data.demand);
    for (const auto& p : c.data.meters)
        m.add_input(p);
    m.add_input(c.data.weather);
    m.add_input(c.data.holidays);
    return m;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    os << text;
    if (!os)
        throw InputError("cannot write " + path.string());
}

std::string summary_line(const std::string& label, const stats::MetricsReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s: %zu days  MAE %.3f ± %.3f kWh  MAPE %.3f ± %.3f %%  MSE %.3f", label.c_str(),
                  r.count(), r.mae_summary().mean, r.mae_summary().std, r.mape_summary().mean, r.mape_summary().std,
                  r.mse_summary().mean);
    return buf;
}

// date,hour,actual,predicted rows back into per-day metrics
stats::MetricsReport read_forecasts(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line.rfind("date,hour,actual,predicted", 0) != 0)
        throw InputError(path.string() + ": expected header date,hour,actual,predicted");
    std::map<std::chrono::sys_days, std::pair<std::vector<double>, std::vector<double>>> days;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = split_csv_line(line);
        if (f.size() != 4)
            throw InputError(path.string() + ": malformed row '" + line + "'");
        if (f[2].empty())
            continue;
        auto& d = days[std::chrono::sys_days(parse_date(f[0]))];
        d.first.push_back(std::stod(f[2]));
        d.second.push_back(std::stod(f[3]));
    }
    stats::MetricsReport r;
    for (const auto& [day, v] : days)
        r.add(Date{day}, stats::metrics(v.first, v.second));
    return r;
}

json report_json(const stats::MetricsReport& r) {
    return {{"days", r.count()},
            {"mae", {{"mean", r.mae_summary().mean}, {"std", r.mae_summary().std}}},
            {"mape", {{"mean", r.mape_summary().mean}, {"std", r.mape_summary().std}}},
            {"mse", {{"mean", r.mse_summary().mean}, {"std", r.mse_summary().std}}}};
}

int cmd_synth(const fs::path& out, std::uint64_t seed, const synth::SynthSpec& spec) {
    RunManifest m("synth", json{{"seed", seed}, {"years", spec.years}, {"start_year", spec.start_year},
                                {"meters", spec.meter_files}}.dump(),
                  seed);
    const auto t0 = std::chrono::steady_clock::now();
    const auto data = synth::generate(seed, spec);
    synth::write_dataset(data, out);
    m.phases["generate"] = seconds_since(t0);
    m.write(out);
    say("wrote synthetic dataset (" + std::to_string(data.demand.demand.size()) + " hours, " +
        std::to_string(data.outliers.size()) + " injected spikes) to " + out.string());
    return 0;
}

int cmd_ingest(const std::vector<std::string>& meters, const std::string& demand_path, const fs::path& out) {
    IngestReport report;
    DistrictDemand d;
    RunManifest m("ingest", json{{"meters", meters}, {"demand", demand_path}}.dump(), 0);
    if (!demand_path.empty()) {
        d = read_demand_csv(demand_path, report);
        m.add_input(demand_path);
    } else {
        if (meters.empty())
            throw ConfigError("ingest needs --meters or --demand");
        std::vector<fs::path> paths(meters.begin(), meters.end());
        d = ingest_meter_files(paths, report);
        for (const auto& p : paths)
            m.add_input(p);
    }
    fs::create_directories(out);
    write_demand_csv(out / "demand.csv", d);
    json rep = {{"rows", report.rows},
                {"hours", d.demand.size()},
                {"negative_diffs", report.negative_diffs},
                {"masked_hours", d.demand.missing_count()},
                {"warnings", report.warnings}};
    write_text(out / "ingest_report.json", rep.dump(2) + "\n");
    m.write(out);
    say("aggregated " + std::to_string(d.demand.size()) + " hours, " + std::to_string(report.negative_diffs) +
        " negative differences masked");
    return 0;
}

int cmd_preprocess(const std::string& input, const fs::path& out, const prep::OutlierOptions& opt) {
    IngestReport report;
    const auto d = read_demand_csv(input, report);
    RunManifest m("preprocess",
                  json{{"alpha", opt.alpha}, {"sg_window", opt.window}, {"sg_polyorder", opt.polyorder},
                       {"period", opt.period}, {"scale_window", opt.scale_window},
                       {"timezone", opt.timezone}}.dump(),
                  0);
    m.add_input(input);
    const auto t0 = std::chrono::steady_clock::now();
    const auto clean = prep::clean_series(d.demand, opt);
    m.phases["clean"] = seconds_since(t0);
    fs::create_directories(out);
    write_demand_csv(out / "repaired.csv", {clean.repaired, d.meter_count});
    std::ofstream os(out / "outliers.csv", std::ios::binary);
    os << "index,timestamp,value,statistic\n";
    for (std::size_t k = 0; k < clean.report.indices.size(); ++k) {
        const auto i = clean.report.indices[k];
        os << i << ',' << format_timestamp(d.demand.time_at(i)) << ',' << format_double(d.demand[i]) << ','
           << format_double(clean.report.statistic[k]) << '\n';
    }
    if (!os)
        throw InputError("cannot write outliers.csv");
    m.write(out);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu outliers flagged (threshold %.3f), %zu masked hours repaired",
                  clean.report.indices.size(), clean.report.threshold, d.demand.missing_count());
    say(buf);
    return 0;
}

int cmd_analyze(const std::string& config_path, const std::string& forecasts, const fs::path& out) {
    const auto c = read_config(config_path);
    auto m = manifest_for("analyze", c);
    auto t0 = std::chrono::steady_clock::now();
    const auto loaded = forecast::load_dataset(c);
    const auto& ds = loaded.dataset;
    m.phases["load"] = seconds_since(t0);
    fs::create_directories(out);

    std::vector<int> lags;
    for (int d = 1; d <= 28; ++d)
        lags.push_back(24 * d);
    const auto rho = stats::lag_correlogram(ds.demand.demand, lags);
    {
        std::ofstream os(out / "correlogram.csv", std::ios::binary);
        os << "lag_hours,lag_days,spearman\n";
        for (std::size_t i = 0; i < lags.size(); ++i)
            os << lags[i] << ',' << lags[i] / 24 << ',' << format_double(rho[i]) << '\n';
    }
    {
        std::ofstream os(out / "component_corr.csv", std::ios::binary);
        os << "weather,raw,trend,seasonal,residual\n";
        for (const auto& [name, parts] : ds.weather_parts) {
            const auto cc = stats::component_correlations(ds.demand_parts, parts);
            os << name << ',' << format_double(cc.raw) << ',' << format_double(cc.trend) << ','
               << format_double(cc.seasonal) << ',' << format_double(cc.residual) << '\n';
        }
    }
    if (!forecasts.empty()) {
        m.add_input(forecasts);
        const auto report = read_forecasts(forecasts);
        const auto strat = stats::stratify_days(report, ds.calendar);
        json doc = {{"all", report_json(report)}};
        for (const auto& [axis, groups] : strat.axes)
            for (const auto& [label, r] : groups)
                doc["axes"][axis][label] = report_json(r);
        write_text(out / "stratified_metrics.json", doc.dump(2) + "\n");
    }
    m.write(out);
    say("analysis written to " + out.string());
    return 0;
}

int cmd_train(const std::string& config_path, const fs::path& out) {
    const auto c = read_config(config_path);
    auto m = manifest_for("train", c);
    auto t0 = std::chrono::steady_clock::now();
    const auto loaded = forecast::load_dataset(c);
    const double load = seconds_since(t0);
    auto run = forecast::run_experiment(c, loaded.dataset, progress(c.name));
    run.phase_seconds["load"] = load;
    forecast::write_run(run, out);
    m.phases = run.phase_seconds;
    m.write(out);
    say(summary_line(c.name, run.report));
    return 0;
}

int cmd_baseline(const std::string& config_path, const std::string& kind, const fs::path& out) {
    const auto c = read_config(config_path);
    const auto k = forecast::parse_baseline(kind);
    auto m = manifest_for("baseline " + kind, c);
    const auto loaded = forecast::load_dataset(c);
    const auto p = forecast::split_samples(forecast::eligible_samples(c, loaded.dataset), c.split);
    const auto run = forecast::run_baseline(c, p, k);
    forecast::write_run(run, out);
    m.phases = run.phase_seconds;
    m.write(out);
    say(summary_line(run.name, run.report));
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& config_path, const std::string& from,
                const std::string& to, const std::string& out) {
    const auto model = forecast::load_model(model_path);
    auto c = read_config(config_path);
    c.timezone = model.timezone;
    const auto loaded = forecast::load_dataset(c);
    const auto specs = features::parse_features(model.features);
    const auto first = std::chrono::sys_days(parse_date(from));
    const auto last = std::chrono::sys_days(parse_date(to.empty() ? from : to));
    std::vector<features::SampleWindow> samples;
    for (auto d = first; d <= last; d += std::chrono::days(1)) {
        auto s = features::build_sample(loaded.dataset, specs, Date{d}, false);
        if (!s)
            throw InputError("history for " + format_date(Date{d}) + " is incomplete");
        samples.push_back(std::move(*s));
    }
    const auto results = forecast::predict(model, samples);
    std::ostringstream os;
    os << "date,hour,actual,predicted\n";
    for (const auto& r : results)
        for (std::size_t h = 0; h < features::kHorizon; ++h)
            os << format_date(r.date) << ',' << h << ',' << (r.has_actual ? format_double(r.actual[h]) : "") << ','
               << format_double(r.predicted[h]) << '\n';
    if (out.empty()) {
        std::cout << os.str();
    } else {
        const fs::path p(out);
        if (!p.parent_path().empty())
            fs::create_directories(p.parent_path());
        write_text(p, os.str());
        auto m = manifest_for("predict", c);
        m.add_input(model_path);
        m.write(p.parent_path().empty() ? fs::path(".") : p.parent_path());
    }
    return 0;
}

int cmd_rolling(const std::string& config_path, const fs::path& out) {
    const auto c = read_config(config_path);
    auto m = manifest_for("rolling", c);
    const auto loaded = forecast::load_dataset(c);
    const auto folds = forecast::rolling_evaluate(c, loaded.dataset, progress(c.name));
    fs::create_directories(out);
    json doc = json::array();
    std::ofstream dist(out / "per_day_mae.csv", std::ios::binary);
    dist << "fold,test_year,date,mae\n";
    for (std::size_t k = 0; k < folds.size(); ++k) {
        const auto& f = folds[k];
        const std::string dir = "fold" + std::to_string(k + 1);
        forecast::write_run(f.run, out / dir);
        doc.push_back({{"fold", k + 1},
                       {"train_years", {f.first_train_year, f.last_train_year}},
                       {"test_year", f.test_year},
                       {"median_mae", f.median_mae},
                       {"test", report_json(f.run.report)}});
        for (std::size_t i = 0; i < f.run.report.count(); ++i)
            dist << k + 1 << ',' << f.test_year << ',' << format_date(f.run.report.days[i]) << ','
                 << format_double(f.run.report.mae[i]) << '\n';
        for (const auto& [phase, s] : f.run.phase_seconds)
            m.phases[dir + "." + phase] = s;
        say(summary_line(dir + " (test " + std::to_string(f.test_year) + ")", f.run.report));
    }
    write_text(out / "rolling.json", json{{"folds", doc}}.dump(2) + "\n");
    m.write(out);
    return 0;
}

int cmd_sweep(const std::string& config_path, const fs::path& out) {
    const auto c = read_config(config_path);
    auto m = manifest_for("sweep", c);
    const auto loaded = forecast::load_dataset(c);
    const auto result = forecast::sweep(c, loaded.dataset);
    fs::create_directories(out);
    json points = json::array();
    for (std::size_t i = 0; i < result.points.size(); ++i) {
        const auto& p = result.points[i];
        const std::string dir = "point" + std::to_string(i);
        forecast::write_run(p.run, out / dir);
        points.push_back({{"point", i},
                          {"wavelet_family", p.family},
                          {"dropout", p.dropout},
                          {"dense", p.dense},
                          {"pooling", p.pooling},
                          {"best_val_loss", p.run.best_val_loss},
                          {"test", report_json(p.run.report)}});
    }
    write_text(out / "sweep.json", json{{"points", points}, {"selected", result.best}}.dump(2) + "\n");
    m.write(out);
    say("selected point " + std::to_string(result.best) + " by validation loss");
    return 0;
}

int cmd_experiment(const std::string& config_path, const fs::path& out) {
    const auto c = read_config(config_path);
    auto m = manifest_for("experiment", c);
    const auto loaded = forecast::load_dataset(c);
    const auto report = experiments::run_variants(c, loaded.dataset, progress(c.name));
    experiments::write_report(report, out);
    for (std::size_t r = 0; r < report.ranking.size(); ++r) {
        const auto& v = report.variants[report.ranking[r]];
        say(std::to_string(r + 1) + ". " + summary_line(v.name, v.run.report));
    }
    m.write(out);
    return 0;
}

int exit_code(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParameterError*>(&e))
        return 2;
    if (dynamic_cast<const InputError*>(&e) || dynamic_cast<const ContractError*>(&e) ||
        dynamic_cast<const ShapeError*>(&e) || dynamic_cast<const UndefinedStatistic*>(&e))
        return 3;
    if (dynamic_cast<const NumericError*>(&e))
        return 4;
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    // the training loop allocates large short-lived buffers; keep them off mmap
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);

    CLI::App app{"Day-ahead heat-demand forecasting with CWT scalograms"};
    app.require_subcommand(1);
    app.add_option("--jobs", g.jobs, "Upper bound on worker threads")->check(CLI::PositiveNumber);
    app.add_flag("-q,--quiet", g.quiet, "Suppress progress output");

    std::string config, out, kind = "naive24", model, from, to, input, demand, forecasts;
    std::vector<std::string> meters;
    std::uint64_t seed = 42;
    synth::SynthSpec spec;
    prep::OutlierOptions popt;

    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic district dataset");
    synth_cmd->add_option("--out", out, "Output directory")->required();
    synth_cmd->add_option("--seed", seed, "Random seed");
    synth_cmd->add_option("--years", spec.years, "Number of calendar years")->check(CLI::Range(2, 50));
    synth_cmd->add_option("--start-year", spec.start_year, "First calendar year");
    synth_cmd->add_option("--meters", spec.meter_files, "Also write cumulative readings for this many meters");
    synth_cmd->add_option("--timezone", spec.timezone, "IANA zone of the district");

    auto* ingest_cmd = app.add_subcommand("ingest", "Aggregate meter readings into district demand");
    ingest_cmd->add_option("--meters", meters, "Meter CSV files (timestamp,meter_id,reading_kwh)");
    ingest_cmd->add_option("--demand", demand, "Pre-aggregated demand CSV instead of meter files");
    ingest_cmd->add_option("--out", out, "Output directory")->required();

    auto* pre_cmd = app.add_subcommand("preprocess", "Detect and repair outliers in a demand series");
    pre_cmd->add_option("--input", input, "Demand CSV")->required();
    pre_cmd->add_option("--out", out, "Output directory")->required();
    pre_cmd->add_option("--alpha", popt.alpha, "Family-wise significance level");
    pre_cmd->add_option("--sg-window", popt.window, "Savitzky-Golay window (samples per phase)");
    pre_cmd->add_option("--sg-polyorder", popt.polyorder, "Savitzky-Golay polynomial order");
    pre_cmd->add_option("--period", popt.period, "Seasonal period in hours");
    pre_cmd->add_option("--scale-window", popt.scale_window, "Robust scale window in hours");
    popt.timezone = "Europe/Copenhagen";
    pre_cmd->add_option("--timezone", popt.timezone, "Zone whose clock hour defines the daily phase (\"\" for UTC index)")
        ->capture_default_str();

    auto* analyze_cmd = app.add_subcommand("analyze", "Correlograms, component correlations, stratified errors");
    analyze_cmd->add_option("--config", config, "Experiment config")->required();
    analyze_cmd->add_option("--forecasts", forecasts, "forecasts.csv to stratify");
    analyze_cmd->add_option("--out", out, "Output directory")->required();

    auto* train_cmd = app.add_subcommand("train", "Train and evaluate the CWT-CNN");
    train_cmd->add_option("--config", config, "Experiment config")->required();
    train_cmd->add_option("--out", out, "Output directory")->required();

    auto* predict_cmd = app.add_subcommand("predict", "Forecast days with a saved model");
    predict_cmd->add_option("--model", model, "model.ckpt")->required();
    predict_cmd->add_option("--config", config, "Config naming the data files")->required();
    predict_cmd->add_option("--date,--from", from, "First forecast date")->required();
    predict_cmd->add_option("--to", to, "Last forecast date (inclusive)");
    predict_cmd->add_option("--out", out, "Output CSV (stdout when omitted)");

    auto* base_cmd = app.add_subcommand("baseline", "Evaluate a reference forecaster");
    base_cmd->add_option("--config", config, "Experiment config")->required();
    base_cmd->add_option("--kind", kind, "naive24, naive168 or linear")
        ->check(CLI::IsMember({"naive24", "naive168", "linear"}));
    base_cmd->add_option("--out", out, "Output directory")->required();

    auto* roll_cmd = app.add_subcommand("rolling", "Calendar-year rolling evaluation");
    roll_cmd->add_option("--config", config, "Experiment config")->required();
    roll_cmd->add_option("--out", out, "Output directory")->required();

    auto* sweep_cmd = app.add_subcommand("sweep", "Cartesian hyperparameter sweep");
    sweep_cmd->add_option("--config", config, "Experiment config")->required();
    sweep_cmd->add_option("--out", out, "Output directory")->required();

    auto* exp_cmd = app.add_subcommand("experiment", "Compare feature-set variants");
    exp_cmd->add_option("--config", config, "Experiment config")->required();
    exp_cmd->add_option("--out", out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    Eigen::setNbThreads(g.jobs);
    try {
        if (*synth_cmd)
            return cmd_synth(out, seed, spec);
        if (*ingest_cmd)
            return cmd_ingest(meters, demand, out);
        if (*pre_cmd)
            return cmd_preprocess(input, out, popt);
        if (*analyze_cmd)
            return cmd_analyze(config, forecasts, out);
        if (*train_cmd)
            return cmd_train(config, out);
        if (*predict_cmd)
            return cmd_predict(model, config, from, to, out);
        if (*base_cmd)
            return cmd_baseline(config, kind, out);
        if (*roll_cmd)
            return cmd_rolling(config, out);
        if (*sweep_cmd)
            return cmd_sweep(config, out);
        if (*exp_cmd)
            return cmd_experiment(config, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    }
    return 0;
}
