#include "scalocast/cwt.hpp"

#include "scalocast/error.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace scalocast::wavelet {

namespace {

int gaussian_order(Family f) {
    switch (f) {
    case Family::Gaus1: return 1;
    case Family::Gaus2: return 2;
    case Family::Gaus3: return 3;
    case Family::Gaus4: return 4;
    case Family::Gaus5: return 5;
    case Family::Gaus6: return 6;
    case Family::Gaus7: return 7;
    case Family::Gaus8: return 8;
    default: return 0;
    }
}

/// Physicists' Hermite polynomial H_n(t).
double hermite(int n, double t) {
    double h0 = 1.0;
    if (n == 0)
        return h0;
    double h1 = 2.0 * t;
    for (int k = 1; k < n; ++k) {
        const double h2 = 2.0 * t * h1 - 2.0 * k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

double gaussian_norm(int n) {
    // ∫ (dⁿ/dtⁿ e^{−t²})² dt = 2^{n−1/2} Γ(n + 1/2)
    return 1.0 / std::sqrt(std::pow(2.0, n - 0.5) * std::tgamma(n + 0.5));
}

int parse_int(std::string_view s) {
    while (!s.empty() && s.front() == ' ')
        s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ')
        s.remove_suffix(1);
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigError("invalid scale '" + std::string(s) + "'");
    return v;
}

} // namespace

Family parse_family(std::string_view name) {
    if (name == "mexh")
        return Family::Mexh;
    if (name == "morl")
        return Family::Morl;
    if (name.size() == 5 && name.substr(0, 4) == "gaus" && name[4] >= '1' && name[4] <= '8')
        return static_cast<Family>(static_cast<int>(Family::Gaus1) + (name[4] - '1'));
    throw ParameterError("unknown wavelet family '" + std::string(name) + "'");
}

std::string family_name(Family family) {
    switch (family) {
    case Family::Mexh:
        return "mexh";
    case Family::Morl:
        return "morl";
    default:
        return "gaus" + std::to_string(gaussian_order(family));
    }
}

double wavelet_eval(Family family, double t) {
    switch (family) {
    case Family::Mexh: {
        const double c = 2.0 / (std::sqrt(3.0) * std::pow(std::numbers::pi, 0.25));
        return c * (1.0 - t * t) * std::exp(-0.5 * t * t);
    }
    case Family::Morl:
        return std::exp(-0.5 * t * t) * std::cos(5.0 * t);
    default: {
        const int n = gaussian_order(family);
        if (n == 0)
            throw ParameterError("unknown wavelet family");
        // dⁿ/dtⁿ e^{−t²} = (−1)ⁿ Hₙ(t) e^{−t²}
        const double derivative = ((n % 2) ? -1.0 : 1.0) * hermite(n, t) * std::exp(-t * t);
        const double sign = ((n / 2) % 2) ? -1.0 : 1.0;
        return sign * gaussian_norm(n) * derivative;
    }
    }
}

std::vector<double> default_scales(std::size_t count) {
    std::vector<double> s(count);
    for (std::size_t i = 0; i < count; ++i)
        s[i] = static_cast<double>(i + 1);
    return s;
}

std::vector<double> parse_scales(std::string_view text) {
    if (auto dots = text.find(".."); dots != std::string_view::npos) {
        const int lo = parse_int(text.substr(0, dots));
        const int hi = parse_int(text.substr(dots + 2));
        if (lo < 1 || hi < lo)
            throw ConfigError("invalid scale range '" + std::string(text) + "'");
        std::vector<double> out;
        for (int a = lo; a <= hi; ++a)
            out.push_back(a);
        return out;
    }
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos)
            comma = text.size();
        const int a = parse_int(text.substr(pos, comma - pos));
        if (a < 1)
            throw ConfigError("scales must be positive");
        out.push_back(a);
        pos = comma + 1;
    }
    return out;
}

CwtEngine::CwtEngine(MotherWavelet wavelet, std::vector<double> scales)
    : wavelet_(wavelet), scales_(std::move(scales)) {
    if (scales_.empty())
        throw ParameterError("CWT needs at least one scale");
    (void)wavelet_eval(wavelet_.family, 0.0);
    for (double a : scales_) {
        if (!(a > 0.0) || !std::isfinite(a))
            throw ParameterError("CWT scales must be positive");
        Kernel k;
        k.radius = static_cast<long>(std::floor(wavelet_.support * a));
        k.norm = 1.0 / std::sqrt(a);
        k.taps.resize(static_cast<std::size_t>(2 * k.radius + 1));
        for (long m = -k.radius; m <= k.radius; ++m)
            k.taps[static_cast<std::size_t>(m + k.radius)] = wavelet_eval(wavelet_.family, static_cast<double>(m) / a);
        kernels_.push_back(std::move(k));
    }
}

void CwtEngine::transform_into(std::span<const double> signal, std::span<double> out, std::size_t stride,
                               std::size_t offset) const {
    for (double v : signal)
        if (!std::isfinite(v))
            throw InputError("CWT input contains non-finite values");
    const auto n = static_cast<long>(signal.size());
    for (std::size_t s = 0; s < kernels_.size(); ++s) {
        const auto& k = kernels_[s];
        for (long tau = 0; tau < n; ++tau) {
            const long lo = std::max(0L, tau - k.radius);
            const long hi = std::min(n - 1, tau + k.radius);
            double acc = 0.0;
            for (long t = lo; t <= hi; ++t)
                acc += signal[static_cast<std::size_t>(t)] * k.taps[static_cast<std::size_t>(t - tau + k.radius)];
            out[(s * static_cast<std::size_t>(n) + static_cast<std::size_t>(tau)) * stride + offset] = k.norm * acc;
        }
    }
}

Scalogram CwtEngine::transform(std::span<const double> signal) const {
    Scalogram sg;
    sg.scales = scales_.size();
    sg.length = signal.size();
    sg.data.assign(sg.scales * sg.length, 0.0);
    transform_into(signal, sg.data, 1, 0);
    return sg;
}

Scalogram cwt(std::span<const double> signal, std::span<const double> scales, Family family) {
    return CwtEngine(MotherWavelet{family}, std::vector<double>(scales.begin(), scales.end())).transform(signal);
}

ScalogramTensor build_tensor(const features::SampleWindow& sample, const CwtEngine& engine) {
    ScalogramTensor x;
    x.scales = engine.scales();
    const std::size_t f = sample.channels.size();
    for (const auto& c : sample.channels)
        x.channel_names.push_back(c.name);
    x.data.assign(x.scales.size() * features::kHistory * f, 0.0);
    for (std::size_t c = 0; c < f; ++c)
        engine.transform_into(sample.channels[c].values, x.data, f, c);
    return x;
}

ScalogramTensor build_tensor(const features::SampleWindow& sample, std::span<const double> scales, Family family) {
    return build_tensor(sample, CwtEngine(MotherWavelet{family}, std::vector<double>(scales.begin(), scales.end())));
}

} // namespace scalocast::wavelet
