#pragma once

#include "scalocast/nn.hpp"

#include <functional>
#include <vector>

namespace scalocast::nn {

struct TrainOptions {
    double learning_rate = 1e-3;
    int batch_size = 32;
    int max_epochs = 1000;
    int patience = 50;
    double lr_factor = 0.9;
    int lr_patience = 10;
    bool shuffle = false;
    std::uint64_t seed = 42;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double learning_rate = 0.0;
    double seconds = 0.0;
};

/// Adam moments and the scheduled learning rate at the end of training.
struct OptimizerState {
    long steps = 0;
    double learning_rate = 0.0;
    Eigen::VectorXd first_moment;
    Eigen::VectorXd second_moment;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    /// 1-based epoch with the lowest validation loss (earliest on ties).
    int best_epoch = 0;
    bool early_stopped = false;
    OptimizerState optimizer;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch Adam on MSE with plateau decay and early stopping. Batches are
/// taken in column order (chronological when the caller orders samples so).
/// On return `net` holds the weights of the best validation epoch.
/// Throws NumericError on a non-finite loss.
TrainHistory train(Network& net, const Eigen::MatrixXd& x_train, const Eigen::MatrixXd& y_train,
                   const Eigen::MatrixXd& x_val, const Eigen::MatrixXd& y_val, const TrainOptions& options,
                   const EpochCallback& on_epoch = {});

/// Validation-style loss: inference-mode MSE evaluated in chunks.
double evaluate_loss(const Network& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int chunk = 64);

Eigen::MatrixXd predict_batched(const Network& net, const Eigen::MatrixXd& x, int chunk = 64);

} // namespace scalocast::nn
