#pragma once

#include "scalocast/features.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace scalocast::baselines {

/// The raw lag channel (`c24`, or `c168` / `holiday_lag` for lag 168) as the
/// forecast, per meter. Throws ContractError if the channel is absent.
features::DayVector seasonal_naive(const features::SampleWindow& sample, int lag);

/// One affine map per horizon hour over all standardized channel values,
/// fitted on standardized targets.
struct LinearBaselineParams {
    features::Scaler scaler;
    /// 24 × (channels·24).
    Eigen::MatrixXd weights;
    Eigen::VectorXd bias;
    /// Set when the normal equations were rank deficient and only the ridge
    /// term made them solvable.
    bool ridge_fallback = false;
};

inline constexpr double kRidge = 1e-8;

/// Fits the scaler on `train` as well. Needs at least two samples.
LinearBaselineParams fit_linear_baseline(std::span<const features::SampleWindow> train);
features::DayVector predict_linear(const LinearBaselineParams& params, const features::SampleWindow& sample);

/// Row vector of standardized channel values, channel-major.
Eigen::VectorXd regressors(const features::SampleWindow& standardized);

} // namespace scalocast::baselines
