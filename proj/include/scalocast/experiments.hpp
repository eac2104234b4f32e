#pragma once

#include "scalocast/forecaster.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace scalocast::experiments {

struct VariantRun {
    std::string name;
    std::vector<std::string> features;
    forecast::RunResult run;
};

/// Two-sided signed-rank test on the per-day MAE of two variants over the
/// test days they share. `result` is empty when the statistic is undefined.
struct PairwiseTest {
    std::string a;
    std::string b;
    std::size_t days = 0;
    std::optional<stats::WilcoxonResult> result;
};

struct ComparativeReport {
    std::vector<VariantRun> variants;
    /// Indices into `variants`, best mean MAE first (config order on ties).
    std::vector<std::size_t> ranking;
    std::vector<PairwiseTest> tests;
};

PairwiseTest compare_pair(const VariantRun& a, const VariantRun& b);
ComparativeReport rank_variants(std::vector<VariantRun> variants);

/// Trains one model per configured variant. Throws ConfigError when the
/// config lists no variants.
ComparativeReport run_variants(const ExperimentConfig& config, const features::Dataset& dataset,
                               const nn::EpochCallback& on_epoch = {});

/// ranking.csv, wilcoxon.csv, report.json and one run directory per variant.
void write_report(const ComparativeReport& report, const std::filesystem::path& dir);

} // namespace scalocast::experiments
