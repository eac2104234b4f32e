#include "scalocast/checkpoint.hpp"

#include "scalocast/error.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>

namespace scalocast::forecast {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoints are written little-endian");

namespace {

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
        throw InputError("checkpoint is truncated");
    return v;
}

void put_vector(std::ostream& os, const Eigen::VectorXd& v) {
    put<std::uint64_t>(os, static_cast<std::uint64_t>(v.size()));
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Eigen::VectorXd get_vector(std::istream& is, std::size_t expected) {
    const auto n = get<std::uint64_t>(is);
    if (n != expected)
        throw InputError("checkpoint vector has " + std::to_string(n) + " values, expected " + std::to_string(expected));
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double))))
        throw InputError("checkpoint is truncated");
    return v;
}

json day_json(const features::DayVector& v) { return json(std::vector<double>(v.begin(), v.end())); }

features::DayVector day_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != features::kHorizon)
        throw InputError("checkpoint target statistics must have 24 values");
    features::DayVector out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

} // namespace

std::string checkpoint_header(const Model& m) {
    const auto& arch = m.net.architecture();
    const auto& in = m.net.input_shape();
    json h;
    h["format"] = "scalocast-model";
    h["version"] = kCheckpointVersion;
    h["input"] = {{"height", in.height}, {"width", in.width}, {"channels", in.channels}};
    h["architecture"] = {{"filters", arch.filters},
                         {"dense", arch.dense},
                         {"dropout", arch.dropout},
                         {"pooling", arch.pooling},
                         {"outputs", arch.outputs}};
    json layers = json::array();
    for (const auto& l : m.net.layers())
        layers.push_back(l.describe());
    h["layers"] = layers;
    h["parameter_count"] = m.net.parameter_count();
    h["features"] = m.features;
    h["channels"] = m.scaler.channel_names;
    h["scaler"] = {{"mean", m.scaler.mean},
                   {"std", m.scaler.stddev},
                   {"target_mean", day_json(m.scaler.target_mean)},
                   {"target_std", day_json(m.scaler.target_std)}};
    h["wavelet"] = {{"family", wavelet::family_name(m.family)}, {"scales", m.scales}};
    h["timezone"] = m.timezone;
    h["seed"] = m.seed;
    if (m.optimizer)
        h["optimizer"] = {{"kind", "adam"}, {"steps", m.optimizer->steps}, {"learning_rate", m.optimizer->learning_rate}};
    else
        h["optimizer"] = nullptr;
    return h.dump();
}

void save_model(const Model& m, const std::filesystem::path& path) {
    if (!path.parent_path().empty())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw InputError("cannot write checkpoint " + path.string());
    const std::string header = checkpoint_header(m);
    os.write(kCheckpointMagic, sizeof kCheckpointMagic);
    put<std::uint32_t>(os, kCheckpointVersion);
    put<std::uint64_t>(os, header.size());
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    put_vector(os, m.net.parameters());
    if (m.optimizer) {
        put_vector(os, m.optimizer->first_moment);
        put_vector(os, m.optimizer->second_moment);
    }
    if (!os)
        throw InputError("failed writing checkpoint " + path.string());
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw InputError("cannot open checkpoint " + path.string());
    char magic[sizeof kCheckpointMagic];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
        throw InputError(path.string() + " is not a scalocast checkpoint");
    const auto version = get<std::uint32_t>(is);
    if (version != kCheckpointVersion)
        throw InputError("unsupported checkpoint version " + std::to_string(version));
    const auto len = get<std::uint64_t>(is);
    if (len > (1u << 30))
        throw InputError("checkpoint header is implausibly large");
    std::string text(len, '\0');
    if (!is.read(text.data(), static_cast<std::streamsize>(len)))
        throw InputError("checkpoint is truncated");

    try {
        const json h = json::parse(text);
        nn::InputShape in{h["input"]["height"].get<int>(), h["input"]["width"].get<int>(),
                          h["input"]["channels"].get<int>()};
        nn::Architecture arch;
        arch.filters = h["architecture"]["filters"].get<std::vector<int>>();
        arch.dense = h["architecture"]["dense"].get<std::vector<int>>();
        arch.dropout = h["architecture"]["dropout"].get<double>();
        arch.pooling = h["architecture"]["pooling"].get<bool>();
        arch.outputs = h["architecture"]["outputs"].get<int>();

        Model m(in, arch);
        if (m.net.parameter_count() != h["parameter_count"].get<std::size_t>())
            throw InputError("checkpoint parameter count does not match its architecture");
        m.features = h["features"].get<std::vector<std::string>>();
        m.scaler.channel_names = h["channels"].get<std::vector<std::string>>();
        m.scaler.mean = h["scaler"]["mean"].get<std::vector<double>>();
        m.scaler.stddev = h["scaler"]["std"].get<std::vector<double>>();
        m.scaler.target_mean = day_from(h["scaler"]["target_mean"]);
        m.scaler.target_std = day_from(h["scaler"]["target_std"]);
        if (m.scaler.mean.size() != m.scaler.channel_names.size() ||
            m.scaler.stddev.size() != m.scaler.channel_names.size() ||
            static_cast<int>(m.scaler.channel_names.size()) != in.channels)
            throw InputError("checkpoint channel contract is inconsistent");
        m.family = wavelet::parse_family(h["wavelet"]["family"].get<std::string>());
        m.scales = h["wavelet"]["scales"].get<std::vector<double>>();
        if (static_cast<int>(m.scales.size()) != in.height)
            throw InputError("checkpoint scale count does not match its input height");
        m.timezone = h["timezone"].get<std::string>();
        m.seed = h["seed"].get<std::uint64_t>();
        m.net.parameters() = get_vector(is, m.net.parameter_count());
        if (!h["optimizer"].is_null()) {
            nn::OptimizerState st;
            st.steps = h["optimizer"]["steps"].get<long>();
            st.learning_rate = h["optimizer"]["learning_rate"].get<double>();
            st.first_moment = get_vector(is, m.net.parameter_count());
            st.second_moment = get_vector(is, m.net.parameter_count());
            m.optimizer = std::move(st);
        }
        return m;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed checkpoint header: ") + e.what());
    }
}

} // namespace scalocast::forecast
