#pragma once

#include "scalocast/cwt.hpp"
#include "scalocast/nn.hpp"
#include "scalocast/preprocess.hpp"
#include "scalocast/trainer.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace scalocast {

struct DataPaths {
    /// Pre-aggregated `timestamp,demand[,meter_count]` file.
    std::filesystem::path demand;
    /// Raw meter files, used when `demand` is empty.
    std::vector<std::filesystem::path> meters;
    std::filesystem::path weather;
    /// `YYYY-MM-DD,name` lines; empty means the built-in Danish calendar.
    std::filesystem::path holidays;
};

struct SplitRule {
    int test_days = 364;
    double train_fraction = 0.8;
};

struct Variant {
    std::string name;
    std::vector<std::string> features;
};

/// Lists for a cartesian hyperparameter sweep; empty lists keep the base value.
struct SweepGrid {
    std::vector<std::string> wavelet_family;
    std::vector<double> dropout;
    std::vector<std::vector<int>> dense;
    std::vector<bool> pooling;
};

struct ExperimentConfig {
    std::string name = "experiment";
    DataPaths data;
    std::string timezone = "Europe/Copenhagen";
    /// Inclusive forecast-date filter.
    std::optional<Date> first_date;
    std::optional<Date> last_date;

    std::vector<std::string> features{"c24.d", "c168.d", "t_amb.d", "t_min.d", "t_max.d"};
    std::string wavelet_family = "morl";
    std::vector<double> scales = wavelet::default_scales(24);

    nn::Architecture architecture;
    nn::TrainOptions training;
    prep::OutlierOptions preprocess;
    /// Repair weather gaps only (no outlier detection on weather).
    bool clean_weather = false;

    SplitRule split;
    SweepGrid sweep;
    std::vector<Variant> variants;
    std::uint64_t seed = 42;
};

/// Relative data paths resolve against `base_dir`. Unknown keys are errors.
ExperimentConfig config_from_json(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical JSON (sorted keys, every field present).
std::string config_to_json(const ExperimentConfig& config);

/// Applies SCALOCAST_SEED if set.
void apply_environment(ExperimentConfig& config);

} // namespace scalocast
