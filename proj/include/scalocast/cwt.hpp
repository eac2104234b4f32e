#pragma once

#include "scalocast/features.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scalocast::wavelet {

enum class Family { Mexh, Morl, Gaus1, Gaus2, Gaus3, Gaus4, Gaus5, Gaus6, Gaus7, Gaus8 };

/// Throws ParameterError for names outside mexh, morl, gaus1..gaus8.
Family parse_family(std::string_view name);
std::string family_name(Family family);

/// Real mother wavelet with a symmetric support used for discretization.
struct MotherWavelet {
    Family family = Family::Morl;
    double support = 8.0;
};

/// ψ(t). gausN is the L2-normalized N-th derivative of e^{−t²} with sign
/// (−1)^⌊N/2⌋.
double wavelet_eval(Family family, double t);

/// Integer scales 1..count.
std::vector<double> default_scales(std::size_t count = 24);

/// Parses "1..24" or a comma list.
std::vector<double> parse_scales(std::string_view text);

/// Row-major (scale, time) coefficients.
struct Scalogram {
    std::size_t scales = 0;
    std::size_t length = 0;
    std::vector<double> data;

    double at(std::size_t s, std::size_t t) const { return data[s * length + t]; }
};

/// coefficient(a, τ) = a^{-1/2} Σ_t x[t] ψ((t − τ)/a) over samples with
/// |(t − τ)/a| ≤ support; samples outside the signal are zero.
/// The wavelet taps for each scale are precomputed once.
class CwtEngine {
public:
    CwtEngine(MotherWavelet wavelet, std::vector<double> scales);

    const MotherWavelet& wavelet() const { return wavelet_; }
    const std::vector<double>& scales() const { return scales_; }

    /// Throws InputError on non-finite input.
    Scalogram transform(std::span<const double> signal) const;
    /// Writes into out[(s * length + t) * stride + offset].
    void transform_into(std::span<const double> signal, std::span<double> out, std::size_t stride,
                        std::size_t offset) const;

private:
    struct Kernel {
        long radius = 0;
        double norm = 1.0;
        std::vector<double> taps;
    };
    MotherWavelet wavelet_;
    std::vector<double> scales_;
    std::vector<Kernel> kernels_;
};

Scalogram cwt(std::span<const double> signal, std::span<const double> scales, Family family);

/// M × 24 × F stack, layout data[(s * 24 + t) * F + f].
struct ScalogramTensor {
    std::vector<double> scales;
    std::vector<std::string> channel_names;
    std::vector<double> data;

    std::size_t depth() const { return channel_names.size(); }
    double at(std::size_t s, std::size_t t, std::size_t f) const {
        return data[(s * features::kHistory + t) * depth() + f];
    }
};

ScalogramTensor build_tensor(const features::SampleWindow& sample, const CwtEngine& engine);
ScalogramTensor build_tensor(const features::SampleWindow& sample, std::span<const double> scales, Family family);

} // namespace scalocast::wavelet
