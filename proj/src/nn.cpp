#include "scalocast/nn.hpp"

#include "scalocast/error.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

namespace scalocast::nn {

using Eigen::Index;
using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0)
        u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

double leaky_relu(double z) { return z >= 0.0 ? z : 0.3 * z; }

std::size_t LayerSpec::weight_count() const {
    switch (kind) {
    case LayerKind::Conv:
        return 9 * static_cast<std::size_t>(in_c) * out_c;
    case LayerKind::Dense:
        return in_size() * out_size();
    default:
        return 0;
    }
}

std::size_t LayerSpec::bias_count() const {
    switch (kind) {
    case LayerKind::Conv:
        return static_cast<std::size_t>(out_c);
    case LayerKind::Dense:
        return out_size();
    default:
        return 0;
    }
}

std::string LayerSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
    case LayerKind::Conv: os << "Conv2D(3x3, relu)"; break;
    case LayerKind::MaxPool: os << "MaxPool(2x2)"; break;
    case LayerKind::Flatten: os << "Flatten"; break;
    case LayerKind::Dense: os << (leaky ? "Dense(leaky_relu 0.3)" : "Dense(linear)"); break;
    case LayerKind::Dropout: os << "Dropout(" << rate << ")"; break;
    }
    if (kind == LayerKind::Flatten || kind == LayerKind::Dense || kind == LayerKind::Dropout)
        os << " -> " << out_size();
    else
        os << " -> " << out_h << "x" << out_w << "x" << out_c;
    os << "  params " << weight_count() + bias_count();
    return os.str();
}

std::vector<LayerSpec> layer_table(InputShape input, const Architecture& arch) {
    if (input.height < 1 || input.width < 1 || input.channels < 1)
        throw ShapeError("input shape must be positive");
    if (arch.outputs < 1)
        throw ParameterError("output width must be positive");
    if (arch.dropout < 0.0 || arch.dropout >= 1.0)
        throw ParameterError("dropout must be in [0, 1)");
    std::vector<LayerSpec> out;
    int h = input.height, w = input.width, c = input.channels;
    for (int f : arch.filters) {
        if (f < 1)
            throw ParameterError("filter counts must be positive");
        out.push_back({LayerKind::Conv, h, w, c, h, w, f});
        c = f;
        if (arch.pooling) {
            if (h < 2 || w < 2)
                throw ShapeError("pooling would reduce the feature map below 1x1");
            out.push_back({LayerKind::MaxPool, h, w, c, h / 2, w / 2, c});
            h /= 2;
            w /= 2;
        }
    }
    const int flat = h * w * c;
    out.push_back({LayerKind::Flatten, h, w, c, 1, 1, flat});
    int width = flat;
    for (int d : arch.dense) {
        if (d < 1)
            throw ParameterError("dense widths must be positive");
        LayerSpec s{LayerKind::Dense, 1, 1, width, 1, 1, d};
        s.leaky = true;
        out.push_back(s);
        width = d;
    }
    if (!arch.dense.empty() || arch.dropout > 0.0) {
        LayerSpec s{LayerKind::Dropout, 1, 1, width, 1, 1, width};
        s.rate = arch.dropout;
        out.push_back(s);
    }
    out.push_back({LayerKind::Dense, 1, 1, width, 1, 1, arch.outputs});
    return out;
}

std::size_t parameter_count(InputShape input, const Architecture& arch) {
    std::size_t n = 0;
    for (const auto& s : layer_table(input, arch))
        n += s.weight_count() + s.bias_count();
    return n;
}

struct Network::Cache {
    std::vector<MatrixXd> inputs;  // dense: layer input; conv: im2col patches
    std::vector<MatrixXd> outputs; // post-activation (conv, dense), dropout mask
    std::vector<std::vector<Index>> argmax;
    Index batch = 0;
};

namespace {

struct Forward {
    const std::vector<LayerSpec>& specs;
    const std::vector<std::size_t>& offsets;
    const double* params;

    void im2col(const LayerSpec& s, const MatrixXd& in, Index batch, MatrixXd& patches) const {
        const Index hw = static_cast<Index>(s.in_h) * s.in_w;
        const Index c = s.in_c;
        patches.setZero(9 * c, batch * hw);
        const double* src = in.data();
        double* dst = patches.data();
        for (Index b = 0; b < batch; ++b)
            for (int i = 0; i < s.in_h; ++i)
                for (int j = 0; j < s.in_w; ++j) {
                    double* col = dst + (b * hw + static_cast<Index>(i) * s.in_w + j) * 9 * c;
                    for (int di = 0; di < 3; ++di) {
                        const int si = i + di - 1;
                        if (si < 0 || si >= s.in_h)
                            continue;
                        for (int dj = 0; dj < 3; ++dj) {
                            const int sj = j + dj - 1;
                            if (sj < 0 || sj >= s.in_w)
                                continue;
                            std::memcpy(col + (di * 3 + dj) * c, src + (b * hw + static_cast<Index>(si) * s.in_w + sj) * c,
                                        sizeof(double) * static_cast<std::size_t>(c));
                        }
                    }
                }
    }

    MatrixXd run(const MatrixXd& x, Mode mode, Rng* rng, Network::Cache* cache) const {
        const Index batch = x.cols();
        if (cache) {
            cache->inputs.assign(specs.size(), MatrixXd());
            cache->outputs.assign(specs.size(), MatrixXd());
            cache->argmax.assign(specs.size(), {});
            cache->batch = batch;
        }
        MatrixXd act = x;
        MatrixXd scratch;
        for (std::size_t l = 0; l < specs.size(); ++l) {
            const auto& s = specs[l];
            switch (s.kind) {
            case LayerKind::Conv: {
                const Index hw = static_cast<Index>(s.in_h) * s.in_w;
                MatrixXd& patches = cache ? cache->inputs[l] : scratch;
                im2col(s, act, batch, patches);
                Map<const MatrixXd> w(params + offsets[l], s.out_c, 9 * static_cast<Index>(s.in_c));
                Map<const VectorXd> bias(params + offsets[l] + s.weight_count(), s.out_c);
                MatrixXd out(static_cast<Index>(s.out_size()), batch);
                Map<MatrixXd> o(out.data(), s.out_c, batch * hw);
                o.noalias() = w * patches;
                o.colwise() += bias;
                o = o.cwiseMax(0.0);
                act = std::move(out);
                if (cache)
                    cache->outputs[l] = act;
                break;
            }
            case LayerKind::MaxPool: {
                MatrixXd out(static_cast<Index>(s.out_size()), batch);
                std::vector<Index> arg;
                if (cache)
                    arg.resize(static_cast<std::size_t>(out.size()));
                const Index in_sz = static_cast<Index>(s.in_size());
                for (Index b = 0; b < batch; ++b)
                    for (int i = 0; i < s.out_h; ++i)
                        for (int j = 0; j < s.out_w; ++j)
                            for (int c = 0; c < s.out_c; ++c) {
                                Index best = -1;
                                double v = -std::numeric_limits<double>::infinity();
                                for (int di = 0; di < 2; ++di)
                                    for (int dj = 0; dj < 2; ++dj) {
                                        const Index k = (static_cast<Index>(2 * i + di) * s.in_w + (2 * j + dj)) * s.in_c + c;
                                        if (act(k, b) > v) {
                                            v = act(k, b);
                                            best = b * in_sz + k;
                                        }
                                    }
                                const Index o = (static_cast<Index>(i) * s.out_w + j) * s.out_c + c;
                                out(o, b) = v;
                                if (cache)
                                    arg[static_cast<std::size_t>(b * out.rows() + o)] = best;
                            }
                if (cache)
                    cache->argmax[l] = std::move(arg);
                act = std::move(out);
                break;
            }
            case LayerKind::Flatten:
                break;
            case LayerKind::Dense: {
                Map<const MatrixXd> w(params + offsets[l], s.out_c, s.in_c);
                Map<const VectorXd> bias(params + offsets[l] + s.weight_count(), s.out_c);
                MatrixXd out(s.out_c, batch);
                out.noalias() = w * act;
                out.colwise() += bias;
                if (s.leaky)
                    out = out.unaryExpr([](double z) { return leaky_relu(z); });
                if (cache)
                    cache->inputs[l] = std::move(act);
                act = std::move(out);
                if (cache)
                    cache->outputs[l] = act;
                break;
            }
            case LayerKind::Dropout: {
                if (mode == Mode::Train && s.rate > 0.0) {
                    if (!rng)
                        throw ContractError("training-mode dropout needs a random stream");
                    MatrixXd mask(act.rows(), act.cols());
                    const double keep = 1.0 / (1.0 - s.rate);
                    for (Index j = 0; j < mask.cols(); ++j)
                        for (Index i = 0; i < mask.rows(); ++i)
                            mask(i, j) = rng->uniform() < s.rate ? 0.0 : keep;
                    act.array() *= mask.array();
                    if (cache)
                        cache->outputs[l] = std::move(mask);
                }
                break;
            }
            }
        }
        return act;
    }
};

} // namespace

Tensor3 conv2d_forward(const Tensor3& x, const ConvParams& p) {
    if (x.channels != p.in_channels)
        throw ShapeError("input has " + std::to_string(x.channels) + " channels, kernel expects " +
                         std::to_string(p.in_channels));
    const std::size_t nw = 9 * static_cast<std::size_t>(p.in_channels) * p.out_channels;
    if (p.kernel.size() != nw || p.bias.size() != static_cast<std::size_t>(p.out_channels))
        throw ShapeError("convolution parameter sizes are inconsistent");
    const std::vector<LayerSpec> specs{
        {LayerKind::Conv, x.height, x.width, x.channels, x.height, x.width, p.out_channels}};
    const std::vector<std::size_t> offsets{0};
    std::vector<double> flat(p.kernel);
    flat.insert(flat.end(), p.bias.begin(), p.bias.end());
    const MatrixXd in = Map<const MatrixXd>(x.values.data(), static_cast<Index>(x.values.size()), 1);
    const MatrixXd out = Forward{specs, offsets, flat.data()}.run(in, Mode::Infer, nullptr, nullptr);
    Tensor3 y(x.height, x.width, p.out_channels);
    std::copy(out.data(), out.data() + out.size(), y.values.begin());
    return y;
}

VectorXd dense_forward(const VectorXd& v, const MatrixXd& w, const VectorXd& b, bool leaky) {
    if (w.cols() != v.size() || w.rows() != b.size())
        throw ShapeError("dense layer shapes do not match");
    LayerSpec s{LayerKind::Dense, 1, 1, static_cast<int>(w.cols()), 1, 1, static_cast<int>(w.rows())};
    s.leaky = leaky;
    const std::vector<LayerSpec> specs{s};
    const std::vector<std::size_t> offsets{0};
    std::vector<double> flat(w.data(), w.data() + w.size());
    flat.insert(flat.end(), b.data(), b.data() + b.size());
    return Forward{specs, offsets, flat.data()}.run(v, Mode::Infer, nullptr, nullptr).col(0);
}

Network::Network(InputShape input, Architecture arch)
    : input_(input), arch_(std::move(arch)), specs_(layer_table(input_, arch_)), cache_(std::make_unique<Cache>()) {
    std::size_t off = 0;
    for (const auto& s : specs_) {
        offsets_.push_back(off);
        off += s.weight_count() + s.bias_count();
    }
    params_ = VectorXd::Zero(static_cast<Index>(off));
    grads_ = VectorXd::Zero(static_cast<Index>(off));
}

Network::~Network() = default;

Network::Network(const Network& other)
    : input_(other.input_), arch_(other.arch_), specs_(other.specs_), offsets_(other.offsets_), params_(other.params_),
      grads_(other.grads_), cache_(std::make_unique<Cache>()) {}

Network& Network::operator=(const Network& other) {
    if (this != &other) {
        input_ = other.input_;
        arch_ = other.arch_;
        specs_ = other.specs_;
        offsets_ = other.offsets_;
        params_ = other.params_;
        grads_ = other.grads_;
        cache_ = std::make_unique<Cache>();
    }
    return *this;
}

void Network::initialize(std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t l = 0; l < specs_.size(); ++l) {
        const auto& s = specs_[l];
        const std::size_t nw = s.weight_count();
        if (nw == 0)
            continue;
        const double fan_in = s.kind == LayerKind::Conv ? 9.0 * s.in_c : static_cast<double>(s.in_c);
        const double bound = std::sqrt(6.0 / fan_in);
        double* p = params_.data() + offsets_[l];
        for (std::size_t i = 0; i < nw; ++i)
            p[i] = rng.uniform(-bound, bound);
        std::fill(p + nw, p + nw + s.bias_count(), 0.0);
    }
}

MatrixXd Network::forward(const MatrixXd& x, Mode mode, Rng* rng) {
    if (x.rows() != static_cast<Index>(specs_.front().in_size()))
        throw ShapeError("network input has " + std::to_string(x.rows()) + " rows, expected " +
                         std::to_string(specs_.front().in_size()));
    return Forward{specs_, offsets_, params_.data()}.run(x, mode, rng, cache_.get());
}

MatrixXd Network::predict(const MatrixXd& x) const {
    if (x.rows() != static_cast<Index>(specs_.front().in_size()))
        throw ShapeError("network input has " + std::to_string(x.rows()) + " rows, expected " +
                         std::to_string(specs_.front().in_size()));
    return Forward{specs_, offsets_, params_.data()}.run(x, Mode::Infer, nullptr, nullptr);
}

void Network::backward(const MatrixXd& grad_output) {
    auto& cache = *cache_;
    const Index batch = cache.batch;
    if (cache.outputs.size() != specs_.size() || grad_output.cols() != batch)
        throw ContractError("backward() without a matching forward()");
    grads_.setZero();
    MatrixXd g = grad_output;
    for (std::size_t l = specs_.size(); l-- > 0;) {
        const auto& s = specs_[l];
        switch (s.kind) {
        case LayerKind::Dropout:
            if (cache.outputs[l].size() > 0)
                g.array() *= cache.outputs[l].array();
            break;
        case LayerKind::Flatten:
            break;
        case LayerKind::Dense: {
            if (s.leaky)
                g.array() *= cache.outputs[l].array().unaryExpr([](double y) { return y >= 0.0 ? 1.0 : 0.3; });
            Map<const MatrixXd> w(params_.data() + offsets_[l], s.out_c, s.in_c);
            Map<MatrixXd> dw(grads_.data() + offsets_[l], s.out_c, s.in_c);
            Map<VectorXd> db(grads_.data() + offsets_[l] + s.weight_count(), s.out_c);
            dw.noalias() = g * cache.inputs[l].transpose();
            db = g.rowwise().sum();
            if (l > 0) {
                MatrixXd next(s.in_c, batch);
                next.noalias() = w.transpose() * g;
                g = std::move(next);
            }
            break;
        }
        case LayerKind::MaxPool: {
            MatrixXd next = MatrixXd::Zero(static_cast<Index>(s.in_size()), batch);
            const auto& arg = cache.argmax[l];
            for (Index k = 0; k < g.size(); ++k)
                next.data()[arg[static_cast<std::size_t>(k)]] += g.data()[k];
            g = std::move(next);
            break;
        }
        case LayerKind::Conv: {
            const Index hw = static_cast<Index>(s.in_h) * s.in_w;
            const Index c = s.in_c;
            g.array() *= (cache.outputs[l].array() > 0.0).cast<double>();
            Map<const MatrixXd> gm(g.data(), s.out_c, batch * hw);
            const MatrixXd& patches = cache.inputs[l];
            Map<const MatrixXd> w(params_.data() + offsets_[l], s.out_c, 9 * c);
            Map<MatrixXd> dw(grads_.data() + offsets_[l], s.out_c, 9 * c);
            Map<VectorXd> db(grads_.data() + offsets_[l] + s.weight_count(), s.out_c);
            dw.noalias() = gm * patches.transpose();
            db = gm.rowwise().sum();
            if (l == 0)
                break;
            MatrixXd dp(9 * c, batch * hw);
            dp.noalias() = w.transpose() * gm;
            MatrixXd next = MatrixXd::Zero(static_cast<Index>(s.in_size()), batch);
            double* dst = next.data();
            const double* src = dp.data();
            for (Index b = 0; b < batch; ++b)
                for (int i = 0; i < s.in_h; ++i)
                    for (int j = 0; j < s.in_w; ++j) {
                        const double* col = src + (b * hw + static_cast<Index>(i) * s.in_w + j) * 9 * c;
                        for (int di = 0; di < 3; ++di) {
                            const int si = i + di - 1;
                            if (si < 0 || si >= s.in_h)
                                continue;
                            for (int dj = 0; dj < 3; ++dj) {
                                const int sj = j + dj - 1;
                                if (sj < 0 || sj >= s.in_w)
                                    continue;
                                double* d = dst + (b * hw + static_cast<Index>(si) * s.in_w + sj) * c;
                                const double* p = col + (di * 3 + dj) * c;
                                for (Index k = 0; k < c; ++k)
                                    d[k] += p[k];
                            }
                        }
                    }
            g = std::move(next);
            break;
        }
        }
    }
}

double mse(const MatrixXd& prediction, const MatrixXd& target) {
    if (prediction.rows() != target.rows() || prediction.cols() != target.cols())
        throw ShapeError("prediction and target shapes differ");
    return (prediction - target).squaredNorm() / static_cast<double>(prediction.size());
}

double Network::train_step_gradients(const MatrixXd& x, const MatrixXd& y, Rng& rng) {
    const MatrixXd out = forward(x, Mode::Train, &rng);
    if (out.rows() != y.rows() || out.cols() != y.cols())
        throw ShapeError("target shape does not match network output");
    const MatrixXd diff = out - y;
    const double loss = diff.squaredNorm() / static_cast<double>(diff.size());
    backward(diff * (2.0 / static_cast<double>(diff.size())));
    return loss;
}

Adam::Adam(std::size_t n, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(VectorXd::Zero(static_cast<Index>(n))),
      v_(VectorXd::Zero(static_cast<Index>(n))) {}

void Adam::step(VectorXd& params, const VectorXd& grads, double lr) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        throw ShapeError("optimizer state does not match parameter count");
    ++t_;
    beta1_pow_ *= beta1_;
    beta2_pow_ *= beta2_;
    const double c1 = 1.0 - beta1_pow_;
    const double c2 = 1.0 - beta2_pow_;
    for (Index i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
        params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
}

double PlateauScheduler::step(double val_loss, double lr) {
    if (val_loss < best_ - min_delta_ || !std::isfinite(best_)) {
        best_ = val_loss;
        wait_ = 0;
        return lr;
    }
    if (++wait_ >= patience_) {
        wait_ = 0;
        return lr * factor_;
    }
    return lr;
}

VectorXd dropout(const VectorXd& v, double p, Mode mode, Rng& rng) {
    if (p < 0.0 || p >= 1.0)
        throw ParameterError("dropout rate must be in [0, 1)");
    if (mode == Mode::Infer || p == 0.0)
        return v;
    VectorXd out(v.size());
    const double keep = 1.0 / (1.0 - p);
    for (Index i = 0; i < v.size(); ++i)
        out[i] = rng.uniform() < p ? 0.0 : v[i] * keep;
    return out;
}

} // namespace scalocast::nn
