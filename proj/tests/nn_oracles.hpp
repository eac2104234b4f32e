#pragma once

#include "scalocast/nn.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

namespace nn = scalocast::nn;

// Quadruple-loop same-padded convolution with ReLU.
inline nn::Tensor3 conv_oracle(const nn::Tensor3& x, const nn::ConvParams& p) {
    nn::Tensor3 y(x.height, x.width, p.out_channels);
    for (int i = 0; i < x.height; ++i)
        for (int j = 0; j < x.width; ++j)
            for (int c = 0; c < p.out_channels; ++c) {
                double acc = p.bias[static_cast<std::size_t>(c)];
                for (int di = 0; di < 3; ++di)
                    for (int dj = 0; dj < 3; ++dj)
                        for (int k = 0; k < x.channels; ++k) {
                            const int si = i + di - 1, sj = j + dj - 1;
                            if (si < 0 || sj < 0 || si >= x.height || sj >= x.width)
                                continue;
                            acc += x.at(si, sj, k) *
                                   p.kernel[static_cast<std::size_t>(((di * 3 + dj) * x.channels + k) * p.out_channels + c)];
                        }
                y.at(i, j, c) = std::max(0.0, acc);
            }
    return y;
}

inline double loss_of(const nn::Network& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) { return nn::mse(net.predict(x), y); }

inline double max_relative_gradient_error(nn::Network& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    nn::Rng rng(1);
    net.train_step_gradients(x, y, rng);
    const Eigen::VectorXd analytic = net.gradients();
    const double h = 1e-4;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < net.parameters().size(); ++i) {
        const double keep = net.parameters()[i];
        net.parameters()[i] = keep + h;
        const double up = loss_of(net, x, y);
        net.parameters()[i] = keep - h;
        const double down = loss_of(net, x, y);
        net.parameters()[i] = keep;
        const double numeric = (up - down) / (2 * h);
        const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
        worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
    }
    return worst;
}

} // namespace oracle
