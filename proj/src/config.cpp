#include "scalocast/config.hpp"

#include "scalocast/error.hpp"
#include "scalocast/features.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace scalocast {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object())
        throw ConfigError("'" + where + "' must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!ok.count(key))
            throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (!obj.contains(key))
        return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid value for '") + key + "': " + e.what());
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty())
        return {};
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

json scales_json(const std::vector<double>& scales) {
    json arr = json::array();
    for (double s : scales)
        arr.push_back(s);
    return arr;
}

} // namespace

ExperimentConfig config_from_json(const std::string& text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig c;
    check_keys(doc, "config",
               {"name", "data", "timezone", "first_date", "last_date", "features", "wavelet", "architecture", "training",
                "preprocess", "split", "sweep", "variants", "seed"});
    read(doc, "name", c.name);
    read(doc, "timezone", c.timezone);
    read(doc, "seed", c.seed);
    read(doc, "features", c.features);
    if (doc.contains("first_date"))
        c.first_date = parse_date(doc["first_date"].get<std::string>());
    if (doc.contains("last_date"))
        c.last_date = parse_date(doc["last_date"].get<std::string>());

    if (doc.contains("data")) {
        const auto& d = doc["data"];
        check_keys(d, "data", {"demand", "meters", "weather", "holidays"});
        if (d.contains("demand"))
            c.data.demand = resolve(base_dir, d["demand"].get<std::string>());
        if (d.contains("weather"))
            c.data.weather = resolve(base_dir, d["weather"].get<std::string>());
        if (d.contains("holidays"))
            c.data.holidays = resolve(base_dir, d["holidays"].get<std::string>());
        if (d.contains("meters"))
            for (const auto& m : d["meters"])
                c.data.meters.push_back(resolve(base_dir, m.get<std::string>()));
    }
    if (doc.contains("wavelet")) {
        const auto& w = doc["wavelet"];
        check_keys(w, "wavelet", {"family", "scales"});
        read(w, "family", c.wavelet_family);
        if (w.contains("scales")) {
            if (w["scales"].is_string())
                c.scales = wavelet::parse_scales(w["scales"].get<std::string>());
            else
                read(w, "scales", c.scales);
        }
    }
    if (doc.contains("architecture")) {
        const auto& a = doc["architecture"];
        check_keys(a, "architecture", {"filters", "dense", "dropout", "pooling"});
        read(a, "filters", c.architecture.filters);
        read(a, "dense", c.architecture.dense);
        read(a, "dropout", c.architecture.dropout);
        read(a, "pooling", c.architecture.pooling);
    }
    if (doc.contains("training")) {
        const auto& t = doc["training"];
        check_keys(t, "training",
                   {"learning_rate", "batch_size", "epochs", "patience", "lr_factor", "lr_patience", "shuffle"});
        read(t, "learning_rate", c.training.learning_rate);
        read(t, "batch_size", c.training.batch_size);
        read(t, "epochs", c.training.max_epochs);
        read(t, "patience", c.training.patience);
        read(t, "lr_factor", c.training.lr_factor);
        read(t, "lr_patience", c.training.lr_patience);
        read(t, "shuffle", c.training.shuffle);
    }
    if (doc.contains("preprocess")) {
        const auto& p = doc["preprocess"];
        check_keys(p, "preprocess", {"alpha", "sg_window", "sg_polyorder", "period", "scale_window", "timezone", "clean_weather"});
        read(p, "alpha", c.preprocess.alpha);
        read(p, "sg_window", c.preprocess.window);
        read(p, "sg_polyorder", c.preprocess.polyorder);
        read(p, "period", c.preprocess.period);
        read(p, "scale_window", c.preprocess.scale_window);
        read(p, "timezone", c.preprocess.timezone);
        read(p, "clean_weather", c.clean_weather);
    }
    if (doc.contains("split")) {
        const auto& s = doc["split"];
        check_keys(s, "split", {"test_days", "train_fraction"});
        read(s, "test_days", c.split.test_days);
        read(s, "train_fraction", c.split.train_fraction);
    }
    if (doc.contains("sweep")) {
        const auto& s = doc["sweep"];
        check_keys(s, "sweep", {"wavelet_family", "dropout", "dense", "pooling"});
        read(s, "wavelet_family", c.sweep.wavelet_family);
        read(s, "dropout", c.sweep.dropout);
        read(s, "dense", c.sweep.dense);
        read(s, "pooling", c.sweep.pooling);
    }
    if (doc.contains("variants")) {
        for (const auto& v : doc["variants"]) {
            check_keys(v, "variant", {"name", "features"});
            Variant var;
            read(v, "name", var.name);
            read(v, "features", var.features);
            if (var.name.empty() || var.features.empty())
                throw ConfigError("each variant needs a name and a feature list");
            c.variants.push_back(std::move(var));
        }
    }

    // validate early so errors surface as configuration problems
    try {
        (void)wavelet::parse_family(c.wavelet_family);
        for (const auto& f : c.sweep.wavelet_family)
            (void)wavelet::parse_family(f);
        (void)features::parse_features(c.features);
        for (const auto& v : c.variants)
            (void)features::parse_features(v.features);
        (void)nn::layer_table({static_cast<int>(c.scales.size()), 24, 1}, c.architecture);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (c.scales.empty())
        throw ConfigError("wavelet.scales must not be empty");
    if (c.split.test_days < 1)
        throw ConfigError("split.test_days must be positive");
    if (!(c.split.train_fraction > 0.0 && c.split.train_fraction < 1.0))
        throw ConfigError("split.train_fraction must be in (0, 1)");
    if (c.training.batch_size < 1 || c.training.max_epochs < 1 || c.training.patience < 1 || c.training.lr_patience < 1)
        throw ConfigError("training sizes must be positive");
    if (!(c.training.learning_rate > 0.0) || !(c.training.lr_factor > 0.0 && c.training.lr_factor <= 1.0))
        throw ConfigError("invalid learning rate settings");
    if (!(c.preprocess.alpha > 0.0 && c.preprocess.alpha < 1.0))
        throw ConfigError("preprocess.alpha must be in (0, 1)");
    c.training.seed = c.seed;
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str(), path.parent_path());
}

std::string config_to_json(const ExperimentConfig& c) {
    json doc;
    doc["name"] = c.name;
    doc["data"] = {{"demand", c.data.demand.string()},
                   {"weather", c.data.weather.string()},
                   {"holidays", c.data.holidays.string()}};
    json meters = json::array();
    for (const auto& m : c.data.meters)
        meters.push_back(m.string());
    doc["data"]["meters"] = meters;
    doc["timezone"] = c.timezone;
    if (c.first_date)
        doc["first_date"] = format_date(*c.first_date);
    if (c.last_date)
        doc["last_date"] = format_date(*c.last_date);
    doc["features"] = c.features;
    doc["wavelet"] = {{"family", c.wavelet_family}, {"scales", scales_json(c.scales)}};
    doc["architecture"] = {{"filters", c.architecture.filters},
                           {"dense", c.architecture.dense},
                           {"dropout", c.architecture.dropout},
                           {"pooling", c.architecture.pooling}};
    doc["training"] = {{"learning_rate", c.training.learning_rate}, {"batch_size", c.training.batch_size},
                       {"epochs", c.training.max_epochs},           {"patience", c.training.patience},
                       {"lr_factor", c.training.lr_factor},         {"lr_patience", c.training.lr_patience},
                       {"shuffle", c.training.shuffle}};
    doc["preprocess"] = {{"alpha", c.preprocess.alpha},
                         {"sg_window", c.preprocess.window},
                         {"sg_polyorder", c.preprocess.polyorder},
                         {"period", c.preprocess.period},
                         {"scale_window", c.preprocess.scale_window},
                         {"timezone", c.preprocess.timezone},
                         {"clean_weather", c.clean_weather}};
    doc["split"] = {{"test_days", c.split.test_days}, {"train_fraction", c.split.train_fraction}};
    doc["sweep"] = {{"wavelet_family", c.sweep.wavelet_family},
                    {"dropout", c.sweep.dropout},
                    {"dense", c.sweep.dense},
                    {"pooling", c.sweep.pooling}};
    json vars = json::array();
    for (const auto& v : c.variants)
        vars.push_back({{"name", v.name}, {"features", v.features}});
    doc["variants"] = vars;
    doc["seed"] = c.seed;
    return doc.dump(2);
}

void apply_environment(ExperimentConfig& config) {
    if (const char* s = std::getenv("SCALOCAST_SEED"); s && *s) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s, &end, 10);
        if (end == s || *end != '\0')
            throw ConfigError("SCALOCAST_SEED must be a non-negative integer");
        config.seed = v;
        config.training.seed = v;
    }
}

} // namespace scalocast
