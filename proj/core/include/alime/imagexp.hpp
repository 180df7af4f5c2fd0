#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "alime/blackbox.hpp"
#include "alime/image.hpp"
#include "alime/perturb.hpp"
#include "alime/surrogate.hpp"

namespace alime {

struct PairRecord {
    Image reference;
    Image distorted;
    DistortionSpec distortion;
    std::string source_id;
};

/// Every decodable image in `dir` (sorted by file name), resized to
/// resize_to x resize_to, paired with each distortion. Unreadable files are
/// skipped with a warning.
std::vector<PairRecord> build_pairs(const std::filesystem::path& dir, std::span<const DistortionSpec> distortions,
                                    std::size_t resize_to, std::uint64_t seed);

/// Pairs from in-memory images; `ids` names them in order.
std::vector<PairRecord> build_pairs(std::span<const Image> images, std::span<const std::string> ids,
                                    std::span<const DistortionSpec> distortions, std::size_t resize_to,
                                    std::uint64_t seed);

struct RobustnessRow {
    std::string sampler;
    std::string distance;
    std::string distortion;
    double mean_dexp = 0.0;
    std::size_t count = 0;
    double normalized = 0.0;
};

struct RobustnessDiagnostics {
    std::size_t failures = 0;
    std::vector<std::string> failure_messages;
    /// Pairs whose reference and distorted explanations used different classes.
    std::size_t class_divergences = 0;
    std::size_t single_segment_explanations = 0;
};

struct RobustnessResult {
    std::vector<RobustnessRow> rows;
    RobustnessDiagnostics diagnostics;

    const RobustnessRow* find(const std::string& sampler, const std::string& distance,
                              const std::string& distortion) const;
};

struct RobustnessOptions {
    std::size_t threads = 1;
    /// Multiplies every relevance map before D_exp is taken.
    double map_scale = 1.0;
    /// Optional directory for per-pair heatmaps.
    std::filesystem::path heatmap_dir;
};

/// The reference configuration the normalized ratios are taken against:
/// mean occlusion with the cosine mask distance.
bool is_baseline(const ExplainConfig& cfg);

/// Explains both images of every pair under every configuration with the same
/// per-pair seed, takes D_exp (K = 1) between the projected relevance maps and
/// averages per (configuration, distortion) over pairs and seeds. Ratios are
/// normalized by the baseline configuration's mean for the same distortion.
RobustnessResult run_robustness(std::span<const PairRecord> pairs, std::span<const ExplainConfig> configs,
                                BlackBox& blackbox, std::span<const std::uint64_t> seeds,
                                const RobustnessOptions& options = {});

RobustnessResult run_robustness(std::span<const PairRecord> pairs, std::span<const ExplainConfig> configs,
                                BlackBox& blackbox, std::uint64_t seed, const RobustnessOptions& options = {});

/// Blend of the image with green (positive) / red (negative), opacity
/// 0.5 * |v| / max|v|. A zero map reproduces the source.
Image render_heatmap(const Image& image, const RelevanceMap& map);
void render_heatmap(const Image& image, const RelevanceMap& map, const std::filesystem::path& out);

/// Procedural 64x64-style textured test images (deterministic per index).
Image textured_image(std::size_t size, std::size_t index);

}  // namespace alime
