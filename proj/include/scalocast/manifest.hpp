#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scalocast {

inline constexpr std::string_view kVersion = "0.1.0";

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);
/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_now();

/// Reproducibility record written once into every output directory.
struct RunManifest {
    std::string command;
    std::string config_hash;
    std::string config;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> versions;
    /// (path, sha256) in the order added.
    std::vector<std::pair<std::string, std::string>> inputs;
    std::string started;
    std::string finished;
    std::map<std::string, double> phases;

    RunManifest(std::string command, const std::string& canonical_config, std::uint64_t seed);
    void add_input(const std::filesystem::path& path);
    std::string to_json() const;
    /// Stamps `finished` and writes manifest.json.
    void write(const std::filesystem::path& dir);
};

} // namespace scalocast
