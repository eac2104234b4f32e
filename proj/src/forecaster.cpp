#include "scalocast/forecaster.hpp"

#include "scalocast/baselines.hpp"
#include "scalocast/checkpoint.hpp"
#include "scalocast/error.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

namespace scalocast::forecast {

using features::DayVector;
using features::kHistory;
using features::kHorizon;
using features::SampleWindow;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int year_of(Date d) { return static_cast<int>(d.year()); }

json summary_json(const stats::Summary& s) { return {{"mean", s.mean}, {"std", s.std}}; }

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw InputError("cannot write " + path.string());
    return os;
}

} // namespace

nn::InputShape input_shape(std::size_t scales, std::size_t channels) {
    return {static_cast<int>(scales), static_cast<int>(kHistory), static_cast<int>(channels)};
}

nn::Network build_network(const ExperimentConfig& config, std::size_t channels) {
    if (channels < 1)
        throw ParameterError("the model needs at least one input channel");
    const auto shape = input_shape(config.scales.size(), channels);
    nn::Network net(shape, config.architecture);
    if (net.parameter_count() != nn::parameter_count(shape, config.architecture))
        throw ShapeError("allocated parameters disagree with the layer table");
    net.initialize(config.seed);
    return net;
}

Eigen::MatrixXd tensor_batch(std::span<const SampleWindow> standardized, const wavelet::CwtEngine& engine) {
    if (standardized.empty())
        return {};
    const std::size_t f = standardized.front().channels.size();
    const std::size_t rows = engine.scales().size() * kHistory * f;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(standardized.size()));
    for (std::size_t i = 0; i < standardized.size(); ++i) {
        const auto& s = standardized[i];
        if (s.channels.size() != f)
            throw ContractError("samples disagree on channel count");
        std::span<double> col(x.col(static_cast<Eigen::Index>(i)).data(), rows);
        for (std::size_t c = 0; c < f; ++c)
            engine.transform_into(s.channels[c].values, col, f, c);
    }
    return x;
}

Eigen::MatrixXd target_batch(std::span<const SampleWindow> standardized) {
    Eigen::MatrixXd y(static_cast<Eigen::Index>(kHorizon), static_cast<Eigen::Index>(standardized.size()));
    for (std::size_t i = 0; i < standardized.size(); ++i) {
        if (!standardized[i].has_target)
            throw ContractError("sample for " + format_date(standardized[i].forecast_date) + " has no target");
        for (std::size_t h = 0; h < kHorizon; ++h)
            y(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(i)) = standardized[i].target[h];
    }
    return y;
}

ForecastResult make_result(const SampleWindow& sample, const DayVector& per_meter) {
    ForecastResult r;
    r.date = sample.forecast_date;
    r.has_actual = sample.has_target;
    for (std::size_t h = 0; h < kHorizon; ++h) {
        r.predicted[h] = per_meter[h] * sample.meter_count[h];
        r.actual[h] = sample.has_target ? sample.target[h] * sample.meter_count[h] : 0.0;
    }
    if (!std::all_of(r.predicted.begin(), r.predicted.end(), [](double v) { return std::isfinite(v); }))
        throw NumericError("non-finite forecast for " + format_date(r.date));
    if (r.has_actual)
        r.metrics = stats::metrics(r.actual, r.predicted);
    return r;
}

std::vector<ForecastResult> predict(const Model& model, std::span<const SampleWindow> samples) {
    std::vector<SampleWindow> stripped;
    stripped.reserve(samples.size());
    for (const auto& s : samples) {
        SampleWindow t = s;
        t.has_target = false;
        t.target.fill(0.0);
        stripped.push_back(model.scaler.apply(t));
    }
    const auto x = tensor_batch(stripped, model.engine());
    std::vector<ForecastResult> out;
    if (samples.empty())
        return out;
    const Eigen::MatrixXd z = nn::predict_batched(model.net, x);
    out.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        DayVector standardized{};
        for (std::size_t h = 0; h < kHorizon; ++h)
            standardized[h] = z(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(i));
        out.push_back(make_result(samples[i], model.scaler.invert_target(standardized)));
    }
    return out;
}

ForecastResult predict(const Model& model, const SampleWindow& sample) {
    return predict(model, std::span<const SampleWindow>(&sample, 1)).front();
}

stats::MetricsReport report_of(std::span<const ForecastResult> results) {
    stats::MetricsReport report;
    for (const auto& r : results)
        if (r.has_actual)
            report.add(r.date, r.metrics);
    return report;
}

LoadedData prepare_dataset(DistrictDemand demand, std::map<std::string, HourlySeries> weather, HolidayCalendar calendar,
                           const ExperimentConfig& config) {
    LoadedData out;
    out.raw_demand = demand.demand;
    auto options = config.preprocess;
    if (options.timezone.empty())
        options.timezone = config.timezone;
    auto cleaned = prep::clean_series(demand.demand, options);
    demand.demand = std::move(cleaned.repaired);
    out.outliers = std::move(cleaned.report);
    if (config.clean_weather)
        for (auto& [name, series] : weather)
            if (series.missing_count())
                series = prep::interpolate_missing(series);
    out.dataset = features::make_dataset(std::move(demand), std::move(weather), std::move(calendar),
                                         CivilClock(config.timezone), config.preprocess.period);
    return out;
}

LoadedData load_dataset(const ExperimentConfig& config) {
    IngestReport report;
    DistrictDemand demand;
    if (!config.data.demand.empty())
        demand = read_demand_csv(config.data.demand, report);
    else if (!config.data.meters.empty())
        demand = ingest_meter_files(config.data.meters, report);
    else
        throw ConfigError("config names neither a demand file nor meter files");
    if (demand.demand.empty())
        throw InputError("demand data is empty");

    std::map<std::string, HourlySeries> weather;
    if (!config.data.weather.empty())
        weather = read_weather_csv(config.data.weather, report);

    HolidayCalendar calendar;
    if (!config.data.holidays.empty()) {
        calendar = HolidayCalendar::load(config.data.holidays);
    } else {
        const CivilClock clock(config.timezone);
        calendar = danish_holidays(year_of(clock.local_date(demand.demand.start())) - 1,
                                   year_of(clock.local_date(demand.demand.end() - std::chrono::hours(1))) + 1);
    }
    auto out = prepare_dataset(std::move(demand), std::move(weather), std::move(calendar), config);
    out.ingest = std::move(report);
    return out;
}

std::vector<SampleWindow> eligible_samples(const ExperimentConfig& config, const features::Dataset& dataset) {
    const auto specs = features::parse_features(config.features);
    features::BuildOptions opts;
    opts.first_date = config.first_date;
    opts.last_date = config.last_date;
    return features::build_samples(dataset, specs, opts).samples;
}

std::pair<std::vector<SampleWindow>, std::vector<SampleWindow>> split_train_val(std::vector<SampleWindow> samples,
                                                                                double train_fraction) {
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(samples.size())));
    if (n_train < 2 || n_train >= samples.size())
        throw ParameterError("too few samples for a training/validation split (" + std::to_string(samples.size()) + ")");
    std::vector<SampleWindow> val(std::make_move_iterator(samples.begin() + static_cast<long>(n_train)),
                                  std::make_move_iterator(samples.end()));
    samples.resize(n_train);
    return {std::move(samples), std::move(val)};
}

Partition split_samples(std::vector<SampleWindow> samples, const SplitRule& rule) {
    const auto test = static_cast<std::size_t>(rule.test_days);
    if (samples.size() <= test)
        throw ParameterError("need more than " + std::to_string(test) + " eligible days, have " +
                             std::to_string(samples.size()));
    Partition p;
    p.test.assign(std::make_move_iterator(samples.end() - static_cast<long>(test)), std::make_move_iterator(samples.end()));
    samples.resize(samples.size() - test);
    std::tie(p.train, p.val) = split_train_val(std::move(samples), rule.train_fraction);
    return p;
}

FitResult fit(const ExperimentConfig& config, std::span<const SampleWindow> train, std::span<const SampleWindow> val,
              const nn::EpochCallback& on_epoch) {
    if (train.empty() || val.empty())
        throw ParameterError("training and validation sets must be nonempty");
    auto t0 = Clock::now();
    const auto scaler = features::Scaler::fit(train);
    const auto family = wavelet::parse_family(config.wavelet_family);
    const wavelet::CwtEngine engine({family}, config.scales);
    const auto st = scaler.apply(train);
    const auto sv = scaler.apply(val);
    const Eigen::MatrixXd x_train = tensor_batch(st, engine);
    const Eigen::MatrixXd y_train = target_batch(st);
    const Eigen::MatrixXd x_val = tensor_batch(sv, engine);
    const Eigen::MatrixXd y_val = target_batch(sv);

    FitResult r{Model(input_shape(config.scales.size(), scaler.channel_names.size()), config.architecture), {}, 0.0, {}};
    r.phase_seconds["scalogram"] = seconds_since(t0);

    Model& m = r.model;
    m.features = config.features;
    m.scaler = scaler;
    m.family = family;
    m.scales = config.scales;
    m.timezone = config.timezone;
    m.seed = config.seed;
    m.net = build_network(config, scaler.channel_names.size());

    t0 = Clock::now();
    auto options = config.training;
    options.seed = config.seed;
    r.history = nn::train(m.net, x_train, y_train, x_val, y_val, options, on_epoch);
    r.phase_seconds["train"] = seconds_since(t0);
    r.best_val_loss = r.history.epochs[static_cast<std::size_t>(r.history.best_epoch - 1)].val_loss;
    m.optimizer = r.history.optimizer;
    return r;
}

RunResult run_experiment(const ExperimentConfig& config, const Partition& p, const nn::EpochCallback& on_epoch) {
    RunResult run;
    run.name = config.name;
    run.train_count = p.train.size();
    run.val_count = p.val.size();
    run.test_count = p.test.size();
    auto fitted = fit(config, p.train, p.val, on_epoch);
    run.history = std::move(fitted.history);
    run.best_val_loss = fitted.best_val_loss;
    run.phase_seconds = std::move(fitted.phase_seconds);
    const auto t0 = Clock::now();
    run.forecasts = predict(fitted.model, p.test);
    run.report = report_of(run.forecasts);
    run.phase_seconds["evaluate"] = seconds_since(t0);
    run.model = std::move(fitted.model);
    return run;
}

RunResult run_experiment(const ExperimentConfig& config, const features::Dataset& dataset,
                         const nn::EpochCallback& on_epoch) {
    const auto t0 = Clock::now();
    auto partition = split_samples(eligible_samples(config, dataset), config.split);
    const double build = seconds_since(t0);
    auto run = run_experiment(config, partition, on_epoch);
    run.phase_seconds["samples"] = build;
    return run;
}

BaselineKind parse_baseline(std::string_view name) {
    if (name == "naive24")
        return BaselineKind::Naive24;
    if (name == "naive168")
        return BaselineKind::Naive168;
    if (name == "linear")
        return BaselineKind::Linear;
    throw ParameterError("unknown baseline '" + std::string(name) + "' (naive24, naive168, linear)");
}

std::string baseline_name(BaselineKind kind) {
    switch (kind) {
    case BaselineKind::Naive24:
        return "naive24";
    case BaselineKind::Naive168:
        return "naive168";
    case BaselineKind::Linear:
        return "linear";
    }
    return "?";
}

RunResult run_baseline(const ExperimentConfig& config, const Partition& p, BaselineKind kind) {
    RunResult run;
    run.name = config.name + "/" + baseline_name(kind);
    run.train_count = p.train.size();
    run.val_count = p.val.size();
    run.test_count = p.test.size();
    auto t0 = Clock::now();
    if (kind == BaselineKind::Linear) {
        // fitted on the training block only, the same data the network's weights see
        const auto params = baselines::fit_linear_baseline(p.train);
        run.phase_seconds["train"] = seconds_since(t0);
        t0 = Clock::now();
        for (const auto& s : p.test)
            run.forecasts.push_back(make_result(s, baselines::predict_linear(params, s)));
    } else {
        const int lag = kind == BaselineKind::Naive24 ? 24 : 168;
        for (const auto& s : p.test)
            run.forecasts.push_back(make_result(s, baselines::seasonal_naive(s, lag)));
    }
    run.report = report_of(run.forecasts);
    run.phase_seconds["evaluate"] = seconds_since(t0);
    return run;
}

std::string metrics_json(const RunResult& run) {
    json doc;
    doc["name"] = run.name;
    doc["samples"] = {{"train", run.train_count}, {"val", run.val_count}, {"test", run.test_count}};
    const auto& r = run.report;
    doc["test"] = {{"days", r.count()},
                   {"mae", summary_json(r.mae_summary())},
                   {"mape", summary_json(r.mape_summary())},
                   {"mse", summary_json(r.mse_summary())},
                   {"mape_excluded", r.mape_excluded}};
    json days = json::array();
    for (std::size_t i = 0; i < r.count(); ++i)
        days.push_back({{"date", format_date(r.days[i])}, {"mae", r.mae[i]}, {"mape", r.mape[i]}, {"mse", r.mse[i]}});
    doc["per_day"] = days;
    if (run.model) {
        doc["training"] = {{"epochs_run", run.history.epochs.size()},
                           {"best_epoch", run.history.best_epoch},
                           {"best_val_loss", run.best_val_loss},
                           {"early_stopped", run.history.early_stopped},
                           {"parameters", run.model->net.parameter_count()},
                           {"channels", run.model->channel_names()}};
    }
    return doc.dump(2) + "\n";
}

void write_run(const RunResult& run, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        auto os = open_out(dir / "metrics.json");
        os << metrics_json(run);
    }
    {
        auto os = open_out(dir / "forecasts.csv");
        os << "date,hour,actual,predicted\n";
        for (const auto& f : run.forecasts)
            for (std::size_t h = 0; h < kHorizon; ++h)
                os << format_date(f.date) << ',' << h << ',' << (f.has_actual ? format_double(f.actual[h]) : "") << ','
                   << format_double(f.predicted[h]) << '\n';
    }
    json timing;
    timing["phases"] = run.phase_seconds;
    if (run.model) {
        {
            auto os = open_out(dir / "loss_curve.csv");
            os << "epoch,train_loss,val_loss,learning_rate\n";
            for (const auto& e : run.history.epochs)
                os << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.val_loss) << ','
                   << format_double(e.learning_rate) << '\n';
        }
        double total = 0.0;
        for (const auto& e : run.history.epochs)
            total += e.seconds;
        const auto n = run.history.epochs.size();
        timing["epochs"] = n;
        timing["seconds_per_epoch"] = n ? total / static_cast<double>(n) : 0.0;
        timing["parameters"] = run.model->net.parameter_count();
        save_model(*run.model, dir / "model.ckpt");
    }
    auto os = open_out(dir / "timing.json");
    os << timing.dump(2) << '\n';
}

std::vector<Fold> rolling_evaluate(const ExperimentConfig& config, const features::Dataset& dataset,
                                   const nn::EpochCallback& on_epoch) {
    const auto samples = eligible_samples(config, dataset);
    std::set<int> year_set;
    for (const auto& s : samples)
        year_set.insert(year_of(s.forecast_date));
    const std::vector<int> years(year_set.begin(), year_set.end());
    if (years.size() < 2)
        throw ParameterError("rolling evaluation needs at least two calendar years of samples");

    std::vector<Fold> folds;
    for (std::size_t k = 1; k < years.size(); ++k) {
        Partition p;
        std::vector<SampleWindow> block;
        for (const auto& s : samples) {
            const int y = year_of(s.forecast_date);
            if (y <= years[k - 1])
                block.push_back(s);
            else if (y == years[k])
                p.test.push_back(s);
        }
        std::tie(p.train, p.val) = split_train_val(std::move(block), config.split.train_fraction);
        Fold fold;
        fold.first_train_year = years.front();
        fold.last_train_year = years[k - 1];
        fold.test_year = years[k];
        ExperimentConfig c = config;
        c.name = config.name + "/fold" + std::to_string(k);
        fold.run = run_experiment(c, p, on_epoch);
        fold.median_mae = stats::median(fold.run.report.mae);
        folds.push_back(std::move(fold));
    }
    return folds;
}

SweepResult sweep(const ExperimentConfig& config, const features::Dataset& dataset) {
    const auto& g = config.sweep;
    const auto families = g.wavelet_family.empty() ? std::vector<std::string>{config.wavelet_family} : g.wavelet_family;
    const auto dropouts = g.dropout.empty() ? std::vector<double>{config.architecture.dropout} : g.dropout;
    const auto denses = g.dense.empty() ? std::vector<std::vector<int>>{config.architecture.dense} : g.dense;
    const auto poolings = g.pooling.empty() ? std::vector<bool>{config.architecture.pooling} : g.pooling;

    const auto partition = split_samples(eligible_samples(config, dataset), config.split);
    SweepResult result;
    for (const auto& fam : families)
        for (double dr : dropouts)
            for (const auto& dense : denses)
                for (bool pool : poolings) {
                    ExperimentConfig c = config;
                    c.wavelet_family = fam;
                    c.architecture.dropout = dr;
                    c.architecture.dense = dense;
                    c.architecture.pooling = pool;
                    c.name = config.name + "/point" + std::to_string(result.points.size());
                    SweepPoint pt{fam, dr, dense, pool, run_experiment(c, partition)};
                    if (result.points.empty() || pt.run.best_val_loss < result.points[result.best].run.best_val_loss)
                        result.best = result.points.size();
                    result.points.push_back(std::move(pt));
                }
    return result;
}

} // namespace scalocast::forecast
