#pragma once

#include "scalocast/config.hpp"
#include "scalocast/csv.hpp"
#include "scalocast/cwt.hpp"
#include "scalocast/features.hpp"
#include "scalocast/nn.hpp"
#include "scalocast/preprocess.hpp"
#include "scalocast/stats.hpp"
#include "scalocast/trainer.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scalocast::forecast {

/// A trained network together with everything needed to feed it: the
/// feature list, the channel contract (held by the scaler) and the wavelet.
struct Model {
    std::vector<std::string> features;
    features::Scaler scaler;
    wavelet::Family family = wavelet::Family::Morl;
    std::vector<double> scales;
    std::string timezone = "UTC";
    std::uint64_t seed = 0;
    nn::Network net;
    std::optional<nn::OptimizerState> optimizer;

    Model(nn::InputShape input, const nn::Architecture& arch) : net(input, arch) {}

    const std::vector<std::string>& channel_names() const { return scaler.channel_names; }
    wavelet::CwtEngine engine() const { return wavelet::CwtEngine({family}, scales); }
};

nn::InputShape input_shape(std::size_t scales, std::size_t channels);

/// Allocates and initializes the network for `channels` input channels and
/// checks its size against the layer table.
nn::Network build_network(const ExperimentConfig& config, std::size_t channels);

/// One column per standardized sample: its scalogram tensor, scale-major.
Eigen::MatrixXd tensor_batch(std::span<const features::SampleWindow> standardized, const wavelet::CwtEngine& engine);
/// One column per sample: its 24 (standardized) target values.
Eigen::MatrixXd target_batch(std::span<const features::SampleWindow> standardized);

struct ForecastResult {
    Date date{};
    /// District totals in kWh.
    features::DayVector predicted{};
    features::DayVector actual{};
    bool has_actual = false;
    stats::Metrics metrics;
};

/// Scales per-meter values by the sample's meter counts and attaches metrics.
ForecastResult make_result(const features::SampleWindow& sample, const features::DayVector& per_meter);

/// Throws ContractError when the sample's channels differ from the model's.
/// The sample's target is never read by the forward path.
ForecastResult predict(const Model& model, const features::SampleWindow& sample);
std::vector<ForecastResult> predict(const Model& model, std::span<const features::SampleWindow> samples);

stats::MetricsReport report_of(std::span<const ForecastResult> results);

/// Inputs after ingestion and repair, with the reports produced on the way.
struct LoadedData {
    features::Dataset dataset;
    IngestReport ingest;
    prep::OutlierReport outliers;
    /// Demand before repair.
    HourlySeries raw_demand;
};

/// Reads the configured files, repairs demand (and weather gaps) and decomposes.
LoadedData load_dataset(const ExperimentConfig& config);
/// Same, from data already in memory.
LoadedData prepare_dataset(DistrictDemand demand, std::map<std::string, HourlySeries> weather, HolidayCalendar calendar,
                           const ExperimentConfig& config);

std::vector<features::SampleWindow> eligible_samples(const ExperimentConfig& config, const features::Dataset& dataset);

struct Partition {
    std::vector<features::SampleWindow> train;
    std::vector<features::SampleWindow> val;
    std::vector<features::SampleWindow> test;
};

/// Chronological split: the last `test_days` samples are the test set; the
/// rest is cut into floor(fraction · n) training and the remainder validation.
Partition split_samples(std::vector<features::SampleWindow> samples, const SplitRule& rule);
/// Chronological train/validation cut of one block.
std::pair<std::vector<features::SampleWindow>, std::vector<features::SampleWindow>>
split_train_val(std::vector<features::SampleWindow> samples, double train_fraction);

struct FitResult {
    Model model;
    nn::TrainHistory history;
    double best_val_loss = 0.0;
    std::map<std::string, double> phase_seconds;
};

FitResult fit(const ExperimentConfig& config, std::span<const features::SampleWindow> train,
              std::span<const features::SampleWindow> val, const nn::EpochCallback& on_epoch = {});

struct RunResult {
    std::string name;
    std::optional<Model> model;
    nn::TrainHistory history;
    double best_val_loss = 0.0;
    std::size_t train_count = 0, val_count = 0, test_count = 0;
    std::vector<ForecastResult> forecasts;
    stats::MetricsReport report;
    std::map<std::string, double> phase_seconds;
};

RunResult run_experiment(const ExperimentConfig& config, const features::Dataset& dataset,
                         const nn::EpochCallback& on_epoch = {});
RunResult run_experiment(const ExperimentConfig& config, const Partition& partition,
                         const nn::EpochCallback& on_epoch = {});

enum class BaselineKind { Naive24, Naive168, Linear };
BaselineKind parse_baseline(std::string_view name);
std::string baseline_name(BaselineKind kind);

/// Baseline forecasts on the same split as run_experiment.
RunResult run_baseline(const ExperimentConfig& config, const Partition& partition, BaselineKind kind);

/// metrics.json, forecasts.csv, and for trained models loss_curve.csv,
/// timing.json and model.ckpt.
void write_run(const RunResult& run, const std::filesystem::path& dir);
std::string metrics_json(const RunResult& run);

struct Fold {
    int test_year = 0;
    int first_train_year = 0;
    int last_train_year = 0;
    RunResult run;
    double median_mae = 0.0;
};

/// Calendar-year folds: train on years 1..k (chronological train/validation
/// cut), test on year k+1. Throws ParameterError with fewer than two years.
std::vector<Fold> rolling_evaluate(const ExperimentConfig& config, const features::Dataset& dataset,
                                   const nn::EpochCallback& on_epoch = {});

struct SweepPoint {
    std::string family;
    double dropout = 0.0;
    std::vector<int> dense;
    bool pooling = false;
    RunResult run;
};

/// Cartesian product of the sweep lists (empty list = base value). The
/// selected point has the lowest best validation loss (earliest on ties).
struct SweepResult {
    std::vector<SweepPoint> points;
    std::size_t best = 0;
};
SweepResult sweep(const ExperimentConfig& config, const features::Dataset& dataset);

} // namespace scalocast::forecast
