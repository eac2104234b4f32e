#include "scalocast/trainer.hpp"

#include "scalocast/error.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace scalocast::nn {

using Eigen::Index;
using Eigen::MatrixXd;

MatrixXd predict_batched(const Network& net, const MatrixXd& x, int chunk) {
    MatrixXd out(net.architecture().outputs, x.cols());
    for (Index start = 0; start < x.cols(); start += chunk) {
        const Index n = std::min<Index>(chunk, x.cols() - start);
        out.middleCols(start, n) = net.predict(x.middleCols(start, n));
    }
    return out;
}

double evaluate_loss(const Network& net, const MatrixXd& x, const MatrixXd& y, int chunk) {
    if (x.cols() == 0)
        throw ParameterError("cannot evaluate loss on an empty set");
    return mse(predict_batched(net, x, chunk), y);
}

TrainHistory train(Network& net, const MatrixXd& x_train, const MatrixXd& y_train, const MatrixXd& x_val,
                   const MatrixXd& y_val, const TrainOptions& options, const EpochCallback& on_epoch) {
    if (x_train.cols() == 0 || x_val.cols() == 0)
        throw ParameterError("training and validation sets must be nonempty");
    if (x_train.cols() != y_train.cols() || x_val.cols() != y_val.cols())
        throw ShapeError("input and target sample counts differ");
    if (options.batch_size < 1 || options.max_epochs < 1)
        throw ParameterError("batch size and epochs must be positive");

    Adam adam(net.parameter_count());
    PlateauScheduler scheduler(options.lr_factor, options.lr_patience);
    Rng dropout_rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
    Rng order_rng(options.seed + 1);

    const Index n = x_train.cols();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});

    TrainHistory history;
    Eigen::VectorXd best = net.parameters();
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;
    double lr = options.learning_rate;

    MatrixXd xb, yb;
    for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        if (options.shuffle)
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[order_rng.below(i)]);

        double loss_sum = 0.0;
        for (Index start = 0; start < n; start += options.batch_size) {
            const Index m = std::min<Index>(options.batch_size, n - start);
            xb.resize(x_train.rows(), m);
            yb.resize(y_train.rows(), m);
            for (Index k = 0; k < m; ++k) {
                xb.col(k) = x_train.col(order[static_cast<std::size_t>(start + k)]);
                yb.col(k) = y_train.col(order[static_cast<std::size_t>(start + k)]);
            }
            const double loss = net.train_step_gradients(xb, yb, dropout_rng);
            if (!std::isfinite(loss) || !net.gradients().allFinite())
                throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
            loss_sum += loss * static_cast<double>(m);
            adam.step(net.parameters(), net.gradients(), lr);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(n);
        rec.val_loss = evaluate_loss(net, x_val, y_val);
        rec.learning_rate = lr;
        if (!std::isfinite(rec.val_loss))
            throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch));
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        history.epochs.push_back(rec);
        if (on_epoch)
            on_epoch(rec);

        if (rec.val_loss < best_val) {
            best_val = rec.val_loss;
            best = net.parameters();
            history.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= options.patience) {
            history.early_stopped = true;
            break;
        }
        lr = scheduler.step(rec.val_loss, lr);
    }
    net.parameters() = best;
    history.optimizer = {adam.steps(), lr, adam.first_moment(), adam.second_moment()};
    return history;
}

} // namespace scalocast::nn
