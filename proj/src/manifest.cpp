#include "scalocast/manifest.hpp"

#include "scalocast/error.hpp"

#include <Eigen/Core>
#include <absl/time/clock.h>
#include <absl/time/time.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <memory>

namespace scalocast {

namespace {

class Digest {
public:
    Digest() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
            throw Error("SHA-256 initialisation failed");
    }
    void update(const char* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx_.get(), data, n) != 1)
            throw Error("SHA-256 update failed");
    }
    std::string hex() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md, &len) != 1)
            throw Error("SHA-256 finalisation failed");
        std::string out;
        char buf[3];
        for (unsigned int i = 0; i < len; ++i) {
            std::snprintf(buf, sizeof buf, "%02x", md[i]);
            out += buf;
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

} // namespace

std::string sha256_hex(std::string_view bytes) {
    Digest d;
    d.update(bytes.data(), bytes.size());
    return d.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot read " + path.string());
    Digest d;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return d.hex();
}

std::string utc_now() {
    return absl::FormatTime("%Y-%m-%dT%H:%M:%SZ", absl::Now(), absl::UTCTimeZone());
}

RunManifest::RunManifest(std::string cmd, const std::string& canonical_config, std::uint64_t s)
    : command(std::move(cmd)), config_hash(sha256_hex(canonical_config)), config(canonical_config), seed(s), started(utc_now()) {
    versions["scalocast"] = std::string(kVersion);
    versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
    versions["checkpoint_format"] = "1";
}

void RunManifest::add_input(const std::filesystem::path& path) {
    if (!path.empty())
        inputs.emplace_back(path.string(), sha256_file(path));
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json doc;
    doc["command"] = command;
    doc["config_hash"] = config_hash;
    doc["config"] = nlohmann::ordered_json::parse(config, nullptr, false);
    if (doc["config"].is_discarded())
        doc["config"] = config;
    doc["seed"] = seed;
    doc["versions"] = versions;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [p, h] : inputs)
        arr.push_back({{"path", p}, {"sha256", h}});
    doc["inputs"] = arr;
    doc["started"] = started;
    doc["finished"] = finished;
    doc["phases"] = phases;
    return doc.dump(2) + "\n";
}

void RunManifest::write(const std::filesystem::path& dir) {
    finished = utc_now();
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / "manifest.json", std::ios::binary);
    os << to_json();
    if (!os)
        throw InputError("cannot write manifest in " + dir.string());
}

} // namespace scalocast
