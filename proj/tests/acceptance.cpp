// Acceptance checks, one line per criterion. Arguments select criteria by number.

#include "nn_oracles.hpp"
#include "oracles.hpp"

#include "scalocast/baselines.hpp"
#include "scalocast/cwt.hpp"
#include "scalocast/forecaster.hpp"
#include "scalocast/preprocess.hpp"
#include "scalocast/stats.hpp"
#include "scalocast/synth.hpp"
#include "scalocast/trainer.hpp"

#include <malloc.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

using namespace scalocast;
using Eigen::MatrixXd;

namespace {

enum class Verdict { Pass, Fail, Warn };

struct Outcome {
    Verdict verdict = Verdict::Fail;
    std::string detail;
};

Outcome check(bool ok, std::string detail) { return {ok ? Verdict::Pass : Verdict::Fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

const synth::SynthData& synthetic(int start, int years) {
    static std::map<std::pair<int, int>, synth::SynthData> cache;
    auto it = cache.find({start, years});
    if (it == cache.end()) {
        synth::SynthSpec spec;
        spec.start_year = start;
        spec.years = years;
        it = cache.emplace(std::pair{start, years}, synth::generate(7, spec)).first;
    }
    return it->second;
}

features::Dataset dataset(const ExperimentConfig& c, int start, int years) {
    const auto& d = synthetic(start, years);
    return forecast::prepare_dataset(d.demand, d.weather, d.holidays, c).dataset;
}

// Scaled configuration used for the learning-signal checks.
ExperimentConfig scaled_config() {
    ExperimentConfig c;
    c.features = {"c24", "c168", "t_amb", "holiday_cat", "time_cyc"};
    c.architecture.filters = {8, 16, 32};
    c.architecture.dense = {128, 128};
    c.architecture.dropout = 0.0;
    c.training.max_epochs = 200;
    c.training.patience = 40;
    c.training.batch_size = 64;
    c.training.shuffle = true;
    return c;
}

Outcome parameter_count() {
    const auto n = nn::parameter_count({24, 24, 17}, nn::Architecture{});
    return check(n == 76'669'976, fmt("%zu parameters for 17 channels", n));
}

Outcome gradient_fidelity() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const bool pool = seed == 5;
        nn::Network net({4, 6, 2}, nn::Architecture{{2, 3}, {8}, 0.0, pool, 3});
        net.initialize(seed);
        std::mt19937_64 gen(seed * 31);
        for (Eigen::Index i = 0; i < net.parameters().size(); ++i)
            net.parameters()[i] += 0.05 * oracle::random_vector(gen, 1)[0];
        MatrixXd x(48, 4), y(3, 4);
        const auto xv = oracle::random_vector(gen, 192), yv = oracle::random_vector(gen, 12);
        std::copy(xv.begin(), xv.end(), x.data());
        std::copy(yv.begin(), yv.end(), y.data());
        worst = std::max(worst, oracle::max_relative_gradient_error(net, x, y));
    }
    return check(worst < 1e-4, fmt("max relative error %.3g over 5 models", worst));
}

Outcome cwt_oracle() {
    std::mt19937_64 rng(2024);
    const auto scales = wavelet::default_scales(24);
    const std::pair<wavelet::Family, double (*)(double)> cases[] = {{wavelet::Family::Mexh, oracle::mexh},
                                                                     {wavelet::Family::Morl, oracle::morl},
                                                                     {wavelet::Family::Gaus1, oracle::gaus1},
                                                                     {wavelet::Family::Gaus8, oracle::gaus8}};
    double worst = 0.0;
    for (auto [family, psi] : cases) {
        const wavelet::CwtEngine engine({family}, scales);
        for (int rep = 0; rep < 100; ++rep) {
            const auto x = oracle::random_vector(rng, 24, -5, 5);
            const auto got = engine.transform(x);
            const auto want = oracle::cwt_direct(x, scales, psi);
            for (std::size_t s = 0; s < scales.size(); ++s)
                for (std::size_t t = 0; t < 24; ++t)
                    worst = std::max(worst, std::abs(got.at(s, t) - want[s][t]));
        }
    }
    return check(worst < 1e-9, fmt("max abs deviation %.3g over 4 families x 100 signals", worst));
}

Outcome decomposition() {
    std::mt19937_64 rng(99);
    double worst_sum = 0.0, worst_mean = 0.0;
    const Hour t0 = parse_timestamp("2020-01-01T00:00:00Z");
    for (int rep = 0; rep < 50; ++rep) {
        const auto x = oracle::random_vector(rng, 24 * 14 + static_cast<std::size_t>(rep), -100, 100);
        const auto d = prep::seasonal_decompose(HourlySeries(t0, x, Unit::kWh), 24);
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!d.trend.missing(i))
                worst_sum = std::max(worst_sum, std::abs(d.trend[i] + d.seasonal[i] + d.residual[i] - x[i]));
        for (std::size_t s = 0; s + 24 <= x.size(); s += 24) {
            double m = 0.0;
            for (std::size_t k = 0; k < 24; ++k)
                m += d.seasonal[s + k];
            worst_mean = std::max(worst_mean, std::abs(m / 24));
        }
    }
    return check(worst_sum < 1e-9 && worst_mean < 1e-9,
                 fmt("additivity %.3g, seasonal period mean %.3g", worst_sum, worst_mean));
}

Outcome outlier_repair() {
    // pooled over several generator seeds so a handful of spikes does not decide the rate
    std::size_t hit = 0, spikes = 0, false_pos = 0, clean = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto data = synth::generate(seed, synth::SynthSpec{});
        prep::OutlierOptions opt;
        opt.alpha = 0.05;
        opt.timezone = synth::SynthSpec{}.timezone;
        const auto rep = prep::detect_outliers(data.demand.demand, opt);
        const std::set<std::size_t> truth(data.outliers.begin(), data.outliers.end());
        for (auto i : rep.indices)
            (truth.count(i) ? hit : false_pos)++;
        spikes += truth.size();
        clean += data.demand.demand.size() - truth.size();
    }
    const double recall = static_cast<double>(hit) / static_cast<double>(spikes);
    const double fpr = static_cast<double>(false_pos) / static_cast<double>(clean);
    return check(recall >= 0.9 && fpr <= 0.001,
                 fmt("recall %.3f (%zu/%zu), false-positive rate %.5f (%zu) over 5 seeds x 4 years", recall, hit,
                     spikes, fpr, false_pos));
}

Outcome metrics_and_stats() {
    const auto m = stats::metrics(std::vector<double>{100, 200}, std::vector<double>{110, 180});
    bool ok = m.mae == 15.0 && m.mape == 10.0 && m.mse == 250.0;
    std::mt19937_64 rng(5);
    int wilcoxon_bad = 0;
    for (std::size_t n = 1; n <= 12; ++n) {
        const auto a = oracle::random_vector(rng, n), b = oracle::random_vector(rng, n);
        if (stats::wilcoxon_signed_rank(a, b).p_value != oracle::wilcoxon_bruteforce(a, b))
            ++wilcoxon_bad;
    }
    ok = ok && wilcoxon_bad == 0;
    const double up = stats::spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{2, 4, 8, 16});
    const double down = stats::spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{9, 5, 1, -3});
    ok = ok && up == 1.0 && down == -1.0;
    return check(ok, fmt("MAE %g MAPE %g MSE %g; exact Wilcoxon mismatches %d; spearman %g / %g", m.mae, m.mape, m.mse,
                         wilcoxon_bad, up, down));
}

Outcome split_protocol() {
    ExperimentConfig c;
    c.features = {"c24", "c168"};
    const auto p = forecast::split_samples(forecast::eligible_samples(c, dataset(c, 2016, 4)), c.split);
    const long tr = static_cast<long>(p.train.size()), va = static_cast<long>(p.val.size());
    return check(p.test.size() == 364 && std::abs(tr - 872) <= 1 && std::abs(va - 219) <= 1,
                 fmt("test %zu, train %ld, val %ld", p.test.size(), tr, va));
}

Outcome end_to_end() {
    const auto c = scaled_config();
    const auto p = forecast::split_samples(forecast::eligible_samples(c, dataset(c, 2017, 3)), c.split);
    const double naive = forecast::run_baseline(c, p, forecast::BaselineKind::Naive24).report.mape_summary().mean;
    const double linear = forecast::run_baseline(c, p, forecast::BaselineKind::Linear).report.mape_summary().mean;
    const auto run = forecast::run_experiment(c, p);
    const double cnn = run.report.mape_summary().mean;
    return check(cnn <= 0.8 * naive && cnn <= linear,
                 fmt("test MAPE cnn %.3f, naive24 %.3f (ratio %.3f), linear %.3f (ratio %.3f); %zu epochs",
                     cnn, naive, cnn / naive, linear, cnn / linear, run.history.epochs.size()));
}

Outcome overfit() {
    nn::Network net({4, 4, 1}, nn::Architecture{{4}, {16}, 0.0, false, 3});
    net.initialize(2);
    std::mt19937_64 gen(21);
    MatrixXd x(16, 8), y(3, 8);
    const auto xv = oracle::random_vector(gen, 128), yv = oracle::random_vector(gen, 24);
    std::copy(xv.begin(), xv.end(), x.data());
    std::copy(yv.begin(), yv.end(), y.data());
    nn::TrainOptions opt;
    opt.batch_size = 8;
    opt.max_epochs = 2000;
    opt.patience = 2000;
    opt.lr_patience = 2000;
    const auto h = nn::train(net, x, y, x, y, opt);
    const double loss = nn::evaluate_loss(net, x, y);
    return check(loss < 1e-3, fmt("train MSE %.3g after %zu epochs", loss, h.epochs.size()));
}

Outcome pooling_ablation() {
    auto c = scaled_config();
    c.architecture.filters = {4, 8, 8};
    c.training.max_epochs = 40;
    c.training.patience = 10;
    const auto p = forecast::split_samples(forecast::eligible_samples(c, dataset(c, 2017, 3)), c.split);
    std::vector<double> with, without;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        c.seed = c.training.seed = seed;
        c.architecture.pooling = false;
        without.push_back(forecast::run_experiment(c, p).report.mae_summary().mean);
        c.architecture.pooling = true;
        with.push_back(forecast::run_experiment(c, p).report.mae_summary().mean);
    }
    const double a = stats::median(without), b = stats::median(with);
    Outcome o = check(a <= b, fmt("median test MAE without pooling %.3f, with pooling %.3f", a, b));
    if (o.verdict == Verdict::Fail)
        o.verdict = Verdict::Warn;
    return o;
}

Outcome determinism() {
    auto c = scaled_config();
    c.architecture.filters = {4, 4, 8};
    c.architecture.dense = {16, 16};
    c.training.max_epochs = 3;
    const auto p = forecast::split_samples(forecast::eligible_samples(c, dataset(c, 2017, 3)), c.split);
    const auto dir = std::filesystem::temp_directory_path() / "scalocast_acceptance_det";
    std::filesystem::remove_all(dir);
    forecast::write_run(forecast::run_experiment(c, p), dir / "a");
    forecast::write_run(forecast::run_experiment(c, p), dir / "b");
    const bool metrics = slurp(dir / "a" / "metrics.json") == slurp(dir / "b" / "metrics.json");
    const bool ckpt = slurp(dir / "a" / "model.ckpt") == slurp(dir / "b" / "model.ckpt");
    return check(metrics && ckpt, fmt("metrics.json identical: %s, checkpoint identical: %s", metrics ? "yes" : "no",
                                      ckpt ? "yes" : "no"));
}

Outcome rolling() {
    auto c = scaled_config();
    c.training.max_epochs = 60;
    const auto folds = forecast::rolling_evaluate(c, dataset(c, 2017, 3));
    if (folds.size() != 2)
        return check(false, fmt("%zu folds emitted, expected 2", folds.size()));
    const double f1 = folds[0].median_mae, f2 = folds[1].median_mae;
    return check(f2 <= 1.1 * f1, fmt("fold medians %.3f / %.3f (ratio %.3f), 2 folds", f1, f2, f2 / f1));
}

} // namespace

int main(int argc, char** argv) {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);

    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
        double limit_seconds; // 0: no limit
    };
    const std::vector<Criterion> criteria = {
        {"parameter count", parameter_count, 1},
        {"gradient fidelity", gradient_fidelity, 30},
        {"cwt oracle", cwt_oracle, 30},
        {"decomposition additivity", decomposition, 0},
        {"outlier repair", outlier_repair, 60},
        {"metrics and statistics", metrics_and_stats, 0},
        {"split protocol", split_protocol, 10},
        {"end-to-end learning signal", end_to_end, 600},
        {"overfit sanity", overfit, 0},
        {"pooling ablation (advisory)", pooling_ablation, 0},
        {"determinism", determinism, 0},
        {"rolling evaluation", rolling, 0},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!selected.empty() && !selected.count(id))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].run();
        } catch (const std::exception& e) {
            o = {Verdict::Fail, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (criteria[k].limit_seconds > 0 && secs > criteria[k].limit_seconds && o.verdict == Verdict::Pass) {
            o.verdict = Verdict::Fail;
            o.detail += fmt("; over the %.0fs budget", criteria[k].limit_seconds);
        }
        const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Warn ? "WARN" : "FAIL";
        std::printf("criterion %2d %-28s %s  %s (%.1fs)\n", id, criteria[k].name, tag, o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += o.verdict == Verdict::Fail;
    }
    return failures == 0 ? 0 : 1;
}
