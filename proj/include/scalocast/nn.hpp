#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace scalocast::nn {

/// Portable uniform draws: the same seed gives the same stream on every
/// platform (std distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    std::uint64_t next() { return engine_(); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Height × width × channels, values stored channel-fastest.
struct Tensor3 {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> values;

    Tensor3() = default;
    Tensor3(int h, int w, int c) : height(h), width(w), channels(c), values(static_cast<std::size_t>(h) * w * c, 0.0) {}
    double& at(int i, int j, int c) { return values[(static_cast<std::size_t>(i) * width + j) * channels + c]; }
    double at(int i, int j, int c) const { return values[(static_cast<std::size_t>(i) * width + j) * channels + c]; }
};

struct InputShape {
    int height = 24;
    int width = 24;
    int channels = 1;
};

struct Architecture {
    std::vector<int> filters{32, 64, 128};
    std::vector<int> dense{1024, 1024};
    double dropout = 0.1;
    bool pooling = false;
    int outputs = 24;
};

enum class LayerKind { Conv, MaxPool, Flatten, Dense, Dropout };

struct LayerSpec {
    LayerKind kind = LayerKind::Conv;
    int in_h = 0, in_w = 0, in_c = 0;
    int out_h = 0, out_w = 0, out_c = 0;
    bool leaky = false; // dense hidden layers
    double rate = 0.0;  // dropout

    std::size_t in_size() const { return static_cast<std::size_t>(in_h) * in_w * in_c; }
    std::size_t out_size() const { return static_cast<std::size_t>(out_h) * out_w * out_c; }
    std::size_t weight_count() const;
    std::size_t bias_count() const;
    std::string describe() const;
};

/// Layer table for an input shape; does not allocate weights.
std::vector<LayerSpec> layer_table(InputShape input, const Architecture& arch);
std::size_t parameter_count(InputShape input, const Architecture& arch);

enum class Mode { Train, Infer };

double leaky_relu(double z);

/// 3×3 same-padded convolution with fused ReLU. Kernel element (di, dj, k, c)
/// lives at kernel[((di * 3 + dj) * Cin + k) * Cout + c].
struct ConvParams {
    int in_channels = 1;
    int out_channels = 1;
    std::vector<double> kernel;
    std::vector<double> bias;
};
Tensor3 conv2d_forward(const Tensor3& x, const ConvParams& params);

/// σ(W v + b) with σ leaky-ReLU(0.3) or identity.
Eigen::VectorXd dense_forward(const Eigen::VectorXd& v, const Eigen::MatrixXd& w, const Eigen::VectorXd& b, bool leaky);

/// Sequential network over batches stored column-wise: each column of the
/// input matrix is one sample flattened height-major, channel-fastest.
/// All parameters live in one flat vector so optimizers and checkpoints can
/// treat them uniformly.
class Network {
public:
    Network(InputShape input, Architecture arch);
    ~Network();
    Network(const Network& other);
    Network& operator=(const Network& other);

    const InputShape& input_shape() const { return input_; }
    const Architecture& architecture() const { return arch_; }
    const std::vector<LayerSpec>& layers() const { return specs_; }
    std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }

    /// Kaiming-uniform weights (bound √(6/fan_in)), zero biases.
    void initialize(std::uint64_t seed);

    Eigen::VectorXd& parameters() { return params_; }
    const Eigen::VectorXd& parameters() const { return params_; }
    Eigen::VectorXd& gradients() { return grads_; }
    const Eigen::VectorXd& gradients() const { return grads_; }

    /// Offsets of the weight and bias blocks of layer i (meaningful for conv/dense).
    std::size_t weight_offset(std::size_t i) const { return offsets_[i]; }

    /// Forward pass; in Train mode dropout masks are drawn from rng and kept
    /// for the next backward().
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Mode mode, Rng* rng = nullptr);
    /// Accumulates parameter gradients (overwriting) from dL/d(output).
    void backward(const Eigen::MatrixXd& grad_output);

    /// Mean squared error over all outputs of the batch; fills gradients().
    double train_step_gradients(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Rng& rng);
    /// Forward without dropout.
    Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;

    struct Cache;

private:
    InputShape input_;
    Architecture arch_;
    std::vector<LayerSpec> specs_;
    std::vector<std::size_t> offsets_;
    Eigen::VectorXd params_;
    Eigen::VectorXd grads_;
    std::unique_ptr<Cache> cache_;
};

double mse(const Eigen::MatrixXd& prediction, const Eigen::MatrixXd& target);

/// Standard bias-corrected Adam.
class Adam {
public:
    explicit Adam(std::size_t n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, double lr);
    long steps() const { return t_; }
    const Eigen::VectorXd& first_moment() const { return m_; }
    const Eigen::VectorXd& second_moment() const { return v_; }

private:
    double beta1_, beta2_, eps_;
    long t_ = 0;
    double beta1_pow_ = 1.0, beta2_pow_ = 1.0;
    Eigen::VectorXd m_, v_;
};

/// Multiplies the learning rate by `factor` after `patience` epochs without an
/// improvement of at least `min_delta`; the counter resets on improvement or decay.
class PlateauScheduler {
public:
    PlateauScheduler(double factor = 0.9, int patience = 10, double min_delta = 1e-12)
        : factor_(factor), patience_(patience), min_delta_(min_delta) {}
    double step(double val_loss, double lr);
    int wait() const { return wait_; }

private:
    double factor_;
    int patience_;
    double min_delta_;
    double best_ = std::numeric_limits<double>::infinity();
    int wait_ = 0;
};

/// Inverted dropout on a standalone vector.
Eigen::VectorXd dropout(const Eigen::VectorXd& v, double p, Mode mode, Rng& rng);

} // namespace scalocast::nn
