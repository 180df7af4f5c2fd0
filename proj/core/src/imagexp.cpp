#include "alime/imagexp.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <cctype>
#include <limits>
#include <map>
#include <optional>
#include <numbers>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "alime/error.hpp"
#include "alime/image_io.hpp"
#include "alime/metrics.hpp"
#include "alime/parallel.hpp"
#include "alime/random.hpp"

namespace alime {

std::vector<PairRecord> build_pairs(std::span<const Image> images, std::span<const std::string> ids,
                                    std::span<const DistortionSpec> distortions, std::size_t resize_to,
                                    std::uint64_t seed) {
    if (images.size() != ids.size()) throw DimensionError("one id per image is required");
    if (images.empty()) throw ParameterError("no usable images");
    if (resize_to == 0) throw ParameterError("resize_to must be positive");
    for (const auto& d : distortions) validate(d);
    std::vector<PairRecord> pairs;
    for (std::size_t i = 0; i < images.size(); ++i) {
        Image ref = resize_bilinear(images[i], resize_to, resize_to);
        for (std::size_t k = 0; k < distortions.size(); ++k)
            pairs.push_back({ref, distort(ref, distortions[k], derive_seed(seed, {i, k})), distortions[k], ids[i]});
    }
    return pairs;
}

std::vector<PairRecord> build_pairs(const std::filesystem::path& dir, std::span<const DistortionSpec> distortions,
                                    std::size_t resize_to, std::uint64_t seed) {
    if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<Image> images;
    std::vector<std::string> ids;
    for (const auto& f : files) {
        try {
            images.push_back(read_image(f));
            ids.push_back(f.stem().string());
        } catch (const Error& e) {
            spdlog::warn("skipping {}: {}", f.string(), e.what());
        }
    }
    if (images.empty()) throw IoError("no decodable images in " + dir.string());
    return build_pairs(images, ids, distortions, resize_to, seed);
}

const RobustnessRow* RobustnessResult::find(const std::string& sampler, const std::string& distance,
                                            const std::string& distortion) const {
    for (const auto& r : rows)
        if (r.sampler == sampler && r.distance == distance && r.distortion == distortion) return &r;
    return nullptr;
}

bool is_baseline(const ExplainConfig& cfg) {
    return cfg.sampler.kind == SamplerKind::mean && cfg.kernel.distance_kind == DistanceKind::cosine_mask;
}

namespace {

std::string file_safe(std::string s) {
    for (auto& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') c = '_';
    return s;
}

}  // namespace

RobustnessResult run_robustness(std::span<const PairRecord> pairs, std::span<const ExplainConfig> configs,
                                BlackBox& blackbox, std::span<const std::uint64_t> seeds,
                                const RobustnessOptions& options) {
    if (pairs.empty()) throw ParameterError("no image pairs to evaluate");
    if (configs.empty()) throw ConfigError("no explanation configurations");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    for (const auto& p : pairs)
        if (!p.reference.same_shape(pairs.front().reference) || !p.distorted.same_shape(p.reference))
            throw DimensionError("all images must share one size");
    const auto baseline_it = std::find_if(configs.begin(), configs.end(), is_baseline);
    if (baseline_it == configs.end())
        throw ConfigError("the baseline configuration (mean sampler, cosine distance) must be present");
    const auto baseline = static_cast<std::size_t>(baseline_it - configs.begin());
    for (const auto& c : configs) validate(c);
    if (!options.heatmap_dir.empty()) std::filesystem::create_directories(options.heatmap_dir);

    // Pairs sharing a source share its reference explanation.
    std::vector<std::string> sources;
    std::vector<std::size_t> source_of(pairs.size());
    std::vector<std::string> distortions;
    std::vector<std::size_t> distortion_of(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& id = pairs[i].source_id;
        auto it = std::find(sources.begin(), sources.end(), id);
        if (it == sources.end()) it = sources.insert(sources.end(), id);
        source_of[i] = static_cast<std::size_t>(it - sources.begin());
        const auto name = to_string(pairs[i].distortion);
        auto dt = std::find(distortions.begin(), distortions.end(), name);
        if (dt == distortions.end()) dt = distortions.insert(distortions.end(), name);
        distortion_of[i] = static_cast<std::size_t>(dt - distortions.begin());
    }

    struct Outcome {
        bool ok = false;
        double dexp = 0.0;
        bool diverged = false;
        bool single_segment = false;
        std::string error;
    };
    const std::size_t n_configs = configs.size(), n_sources = sources.size();
    // outcomes[seed][config][pair]
    std::vector<Outcome> outcomes(seeds.size() * n_configs * pairs.size());
    const auto slot = [&](std::size_t s, std::size_t c, std::size_t p) -> Outcome& {
        return outcomes[(s * n_configs + c) * pairs.size() + p];
    };

    parallel_for(seeds.size() * n_configs * n_sources, options.threads, [&](std::size_t unit) {
        const std::size_t s = unit / (n_configs * n_sources);
        const std::size_t c = (unit / n_sources) % n_configs;
        const std::size_t src = unit % n_sources;
        ExplainConfig cfg = configs[c];
        cfg.seed = derive_seed(seeds[s], {src});
        cfg.threads = 1;

        std::optional<ImageExplanation> ref;
        RelevanceMap ref_map;
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            if (source_of[p] != src) continue;
            Outcome& out = slot(s, c, p);
            try {
                if (!ref) {
                    ref = explain_image(pairs[p].reference, blackbox, cfg);
                    ref_map = project_explanation(ref->explanation, ref->segmentation);
                }
                const auto dist = explain_image(pairs[p].distorted, blackbox, cfg);
                RelevanceMap dist_map = project_explanation(dist.explanation, dist.segmentation);
                RelevanceMap a = ref_map;
                if (options.map_scale != 1.0) {
                    for (auto& v : a.values) v *= options.map_scale;
                    for (auto& v : dist_map.values) v *= options.map_scale;
                }
                out.dexp = explanation_distance(std::span(&a, 1), std::span(&dist_map, 1));
                out.diverged = ref->explanation.class_id != dist.explanation.class_id;
                out.single_segment = ref->segmentation.n_segments() == 1 || dist.segmentation.n_segments() == 1;
                out.ok = true;
                if (!options.heatmap_dir.empty()) {
                    const auto stem = file_safe(fmt::format("{}_{}_{}_{}_s{}", pairs[p].source_id,
                                                            to_string(pairs[p].distortion), to_string(cfg.sampler),
                                                            to_string(cfg.kernel.distance_kind), seeds[s]));
                    render_heatmap(pairs[p].reference, a, options.heatmap_dir / (stem + "_ref.png"));
                    render_heatmap(pairs[p].distorted, dist_map, options.heatmap_dir / (stem + "_dist.png"));
                }
            } catch (const Error& e) {
                out.error = fmt::format("{} / {} / {}: {}", pairs[p].source_id, to_string(pairs[p].distortion),
                                        config_digest(cfg), e.what());
            }
        }
    });

    RobustnessResult result;
    std::vector<std::vector<double>> sums(n_configs, std::vector<double>(distortions.size(), 0.0));
    std::vector<std::vector<std::size_t>> counts(n_configs, std::vector<std::size_t>(distortions.size(), 0));
    for (std::size_t s = 0; s < seeds.size(); ++s)
        for (std::size_t c = 0; c < n_configs; ++c)
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                const Outcome& o = slot(s, c, p);
                if (!o.ok) {
                    ++result.diagnostics.failures;
                    result.diagnostics.failure_messages.push_back(o.error);
                    continue;
                }
                sums[c][distortion_of[p]] += o.dexp;
                ++counts[c][distortion_of[p]];
                result.diagnostics.class_divergences += o.diverged;
                result.diagnostics.single_segment_explanations += o.single_segment;
            }

    for (std::size_t c = 0; c < n_configs; ++c)
        for (std::size_t d = 0; d < distortions.size(); ++d) {
            if (counts[c][d] == 0) continue;
            RobustnessRow row;
            row.sampler = to_string(configs[c].sampler);
            row.distance = to_string(configs[c].kernel.distance_kind);
            row.distortion = distortions[d];
            row.count = counts[c][d];
            row.mean_dexp = sums[c][d] / static_cast<double>(row.count);
            result.rows.push_back(row);
        }
    for (std::size_t c = 0, r = 0; c < n_configs; ++c)
        for (std::size_t d = 0; d < distortions.size(); ++d) {
            if (counts[c][d] == 0) continue;
            auto& row = result.rows[r++];
            if (c == baseline) {
                row.normalized = 1.0;
                continue;
            }
            const double base = counts[baseline][d] ? sums[baseline][d] / static_cast<double>(counts[baseline][d])
                                                    : std::numeric_limits<double>::quiet_NaN();
            if (base == 0.0)
                row.normalized = row.mean_dexp == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
            else
                row.normalized = row.mean_dexp / base;
        }
    return result;
}

RobustnessResult run_robustness(std::span<const PairRecord> pairs, std::span<const ExplainConfig> configs,
                                BlackBox& blackbox, std::uint64_t seed, const RobustnessOptions& options) {
    return run_robustness(pairs, configs, blackbox, std::span<const std::uint64_t>(&seed, 1), options);
}

Image textured_image(std::size_t size, std::size_t index) {
    if (size == 0) throw ParameterError("texture size must be positive");
    Rng rng(derive_seed(0x7e47u, {index}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto s = static_cast<double>(size);

    struct Grating {
        double fx, fy, phase, amp;
        std::array<double, 3> tint;
    };
    std::vector<Grating> gratings;
    for (int g = 0; g < 3; ++g) {
        const double angle = unit(rng) * std::numbers::pi;
        const double freq = (2.0 + 10.0 * unit(rng)) / s;
        gratings.push_back({freq * std::cos(angle), freq * std::sin(angle), unit(rng) * 2.0 * std::numbers::pi,
                            0.08 + 0.1 * unit(rng), {unit(rng), unit(rng), unit(rng)}});
    }
    struct Disc {
        double cx, cy, r;
        std::array<double, 3> color;
    };
    std::vector<Disc> discs;
    const int n_discs = 3 + static_cast<int>(unit(rng) * 4);
    for (int d = 0; d < n_discs; ++d)
        discs.push_back({unit(rng) * s, unit(rng) * s, (0.08 + 0.17 * unit(rng)) * s, {unit(rng), unit(rng), unit(rng)}});
    const std::array<double, 3> base{0.2 + 0.4 * unit(rng), 0.2 + 0.4 * unit(rng), 0.2 + 0.4 * unit(rng)};
    const double gx = unit(rng) - 0.5, gy = unit(rng) - 0.5;

    Image img(size, size, 3);
    for (std::size_t r = 0; r < size; ++r)
        for (std::size_t c = 0; c < size; ++c) {
            const double x = static_cast<double>(c), y = static_cast<double>(r);
            std::array<double, 3> v{};
            for (std::size_t ch = 0; ch < 3; ++ch) v[ch] = base[ch] + 0.3 * (gx * x + gy * y) / s;
            for (const auto& g : gratings) {
                const double w = g.amp * std::sin(2.0 * std::numbers::pi * (g.fx * x + g.fy * y) + g.phase);
                for (std::size_t ch = 0; ch < 3; ++ch) v[ch] += w * (0.5 + g.tint[ch]);
            }
            for (const auto& d : discs) {
                const double dist = std::hypot(x - d.cx, y - d.cy);
                if (dist < d.r) {
                    const double edge = std::clamp(d.r - dist, 0.0, 1.0);
                    for (std::size_t ch = 0; ch < 3; ++ch) v[ch] = (1 - edge) * v[ch] + edge * d.color[ch];
                }
            }
            // fine-grained deterministic texture
            const double hash = static_cast<double>(mix64(index * 1315423911u + r * size + c) >> 11) * 0x1.0p-53;
            for (std::size_t ch = 0; ch < 3; ++ch) img.at(r, c, ch) = clamp_unit(v[ch] + 0.06 * (hash - 0.5));
        }
    return img;
}

}  // namespace alime
