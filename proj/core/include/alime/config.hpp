#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "alime/imagexp.hpp"
#include "alime/surrogate.hpp"
#include "alime/synth2d.hpp"

namespace alime {

using Json = nlohmann::json;

/// JSON field names match the struct members. Readers start from the
/// defaults and override only fields that are present; unknown keys are a
/// ConfigError.
Json to_json(const ExplainConfig& cfg);
ExplainConfig explain_config_from_json(const Json& j, ExplainConfig base = {});

Json to_json(const Synth2DConfig& cfg);
Synth2DConfig synth2d_config_from_json(const Json& j, Synth2DConfig base = {});

/// Grid description for the robustness study.
struct RobustnessConfig {
    std::size_t resize_to = 224;
    /// Shared settings; sampler and distance kind are overridden per cell.
    ExplainConfig explain{};
    double sigma_cosine = 0.25;
    double sigma_msssim = 0.25;
    std::vector<SamplerSpec> samplers;
    std::vector<DistanceKind> distances;
    std::vector<DistortionSpec> distortions;
    std::vector<std::uint64_t> seeds;
    bool heatmaps = false;
};

/// Grid defaults: samplers {zero, mean, noise@0.01/0.05/0.1, blur@3/5/11,
/// contrast@0.5}, distances {cosine, MS-SSIM}, distortions {noise@0.05,
/// blur@5, contrast@0.5}, 1000 samples, seed list {0}.
RobustnessConfig default_robustness_config();

/// One ExplainConfig per (sampler, distance) cell.
std::vector<ExplainConfig> expand(const RobustnessConfig& cfg);

Json to_json(const RobustnessConfig& cfg);
RobustnessConfig robustness_config_from_json(const Json& j, RobustnessConfig base = default_robustness_config());

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const Json& j, const std::filesystem::path& path);

}  // namespace alime
