#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace ipu::cli {

/// Provenance embedded in every artifact.
struct ArtifactStamp {
    std::uint64_t seed = 0;
    std::size_t count = 0;
    std::string config_hash;
    nlohmann::json config;
};

ArtifactStamp make_stamp(const RunConfig& cfg);

/// "# ipucop seed=... count=... config_hash=...\n"
std::string stamp_comment(const ArtifactStamp& stamp);

/// {"seed":..,"count":..,"config_hash":..,"config":{..}}
nlohmann::json stamp_json(const ArtifactStamp& stamp);

nlohmann::json marginals_json(const std::vector<MarginalModel>& marginals, double alpha);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace ipu::cli
