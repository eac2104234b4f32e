#pragma once

#include "scalocast/forecaster.hpp"

#include <filesystem>
#include <string>

namespace scalocast::forecast {

inline constexpr char kCheckpointMagic[8] = {'S', 'C', 'L', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout: magic, version, JSON header length and text, then the raw
/// little-endian parameter doubles and, when present, the Adam moments.
void save_model(const Model& model, const std::filesystem::path& path);
/// Throws InputError on a malformed or foreign file.
Model load_model(const std::filesystem::path& path);

/// The header as written into the checkpoint.
std::string checkpoint_header(const Model& model);

} // namespace scalocast::forecast
