#include "scalocast/baselines.hpp"

#include "scalocast/error.hpp"

namespace scalocast::baselines {

using features::DayVector;
using features::kHistory;
using features::kHorizon;
using features::SampleWindow;

DayVector seasonal_naive(const SampleWindow& sample, int lag) {
    const features::Channel* ch = nullptr;
    if (lag == 24) {
        ch = sample.find("c24");
    } else if (lag == 168) {
        ch = sample.find("c168");
        if (!ch)
            ch = sample.find("holiday_lag");
    } else {
        throw ParameterError("seasonal-naive lag must be 24 or 168");
    }
    if (!ch)
        throw ContractError("sample has no lag-" + std::to_string(lag) + " demand channel");
    return ch->values;
}

Eigen::VectorXd regressors(const SampleWindow& s) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(s.channels.size() * kHistory));
    for (std::size_t c = 0; c < s.channels.size(); ++c)
        for (std::size_t k = 0; k < kHistory; ++k)
            x[static_cast<Eigen::Index>(c * kHistory + k)] = s.channels[c].values[k];
    return x;
}

LinearBaselineParams fit_linear_baseline(std::span<const SampleWindow> train) {
    if (train.size() < 2)
        throw ParameterError("linear baseline needs at least two samples");
    LinearBaselineParams p;
    p.scaler = features::Scaler::fit(train);
    const auto scaled = p.scaler.apply(train);
    const auto n = static_cast<Eigen::Index>(scaled.size());
    const auto d = static_cast<Eigen::Index>(scaled.front().channels.size() * kHistory);

    // centring handles the intercept exactly, so the ridge term never shrinks it
    Eigen::MatrixXd x(n, d);
    Eigen::MatrixXd y(n, static_cast<Eigen::Index>(kHorizon));
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i) = regressors(scaled[static_cast<std::size_t>(i)]).transpose();
        for (std::size_t h = 0; h < kHorizon; ++h)
            y(i, static_cast<Eigen::Index>(h)) = scaled[static_cast<std::size_t>(i)].target[h];
    }
    const Eigen::RowVectorXd x_mean = x.colwise().mean();
    const Eigen::RowVectorXd y_mean = y.colwise().mean();
    x.rowwise() -= x_mean;
    y.rowwise() -= y_mean;

    Eigen::MatrixXd gram = x.transpose() * x;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_check(gram);
    p.ridge_fallback = rank_check.rank() < d;
    gram.diagonal().array() += kRidge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success)
        throw NumericError("linear baseline normal equations could not be factorized");
    const Eigen::MatrixXd beta = ldlt.solve(x.transpose() * y); // d × 24
    if (!beta.allFinite())
        throw NumericError("linear baseline produced non-finite weights");
    p.weights = beta.transpose();
    p.bias = (y_mean - x_mean * beta).transpose();
    return p;
}

DayVector predict_linear(const LinearBaselineParams& p, const SampleWindow& sample) {
    SampleWindow stripped = sample;
    stripped.has_target = false;
    const SampleWindow scaled = p.scaler.apply(stripped);
    const Eigen::VectorXd x = regressors(scaled);
    if (x.size() != p.weights.cols())
        throw ContractError("sample channels do not match the linear baseline");
    const Eigen::VectorXd z = p.weights * x + p.bias;
    DayVector standardized{};
    for (std::size_t h = 0; h < kHorizon; ++h)
        standardized[h] = z[static_cast<Eigen::Index>(h)];
    return p.scaler.invert_target(standardized);
}

} // namespace scalocast::baselines
