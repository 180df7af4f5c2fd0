#include "alime/config.hpp"

#include <fstream>
#include <set>

#include "alime/error.hpp"

namespace alime {
namespace {

void reject_unknown(const Json& j, std::initializer_list<const char*> known, const char* where) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ConfigError(std::string("unknown field '") + key + "' in " + where);
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

Json sampler_json(const SamplerSpec& s) { return {{"kind", to_string(s.kind)}, {"level", s.level}}; }

SamplerSpec sampler_from(const Json& j, SamplerSpec base = {}) {
    if (j.is_string()) return sampler_spec_from_string(j.get<std::string>());
    reject_unknown(j, {"kind", "level"}, "sampler");
    if (j.contains("kind")) base.kind = sampler_kind_from_string(j["kind"].get<std::string>());
    read(j, "level", base.level);
    return base;
}

std::string form_name(PerceptualForm f) {
    return f == PerceptualForm::similarity ? "similarity" : "one_minus_similarity";
}

PerceptualForm form_from(const std::string& s) {
    if (s == "similarity") return PerceptualForm::similarity;
    if (s == "one_minus_similarity") return PerceptualForm::one_minus_similarity;
    throw ConfigError("unknown perceptual_form '" + s + "'");
}

Json forest_json(const ForestConfig& f) {
    return {{"n_trees", f.n_trees},
            {"max_features", f.max_features},
            {"min_samples_leaf", f.min_samples_leaf},
            {"bootstrap", f.bootstrap}};
}

Json ridge_json(const RidgeConfig& r) { return {{"alpha", r.alpha}, {"fit_intercept", r.fit_intercept}}; }

RidgeConfig ridge_from(const Json& j, RidgeConfig base) {
    reject_unknown(j, {"alpha", "fit_intercept"}, "ridge");
    read(j, "alpha", base.alpha);
    read(j, "fit_intercept", base.fit_intercept);
    return base;
}

}  // namespace

Json to_json(const ExplainConfig& cfg) {
    return {{"n_samples", cfg.n_samples},
            {"sampler", sampler_json(cfg.sampler)},
            {"kernel",
             {{"sigma", cfg.kernel.sigma},
              {"distance_kind", to_string(cfg.kernel.distance_kind)},
              {"perceptual_form", form_name(cfg.kernel.perceptual_form)}}},
            {"ridge", ridge_json(cfg.ridge)},
            {"segments",
             {{"n_segments", cfg.segments.n_segments},
              {"compactness", cfg.segments.compactness},
              {"max_iters", cfg.segments.max_iters}}},
            {"msssim",
             {{"n_scales", cfg.msssim.n_scales},
              {"scale_weights", cfg.msssim.scale_weights},
              {"window_size", cfg.msssim.window_size},
              {"window_sigma", cfg.msssim.window_sigma},
              {"k1", cfg.msssim.k1},
              {"k2", cfg.msssim.k2},
              {"dynamic_range", cfg.msssim.dynamic_range},
              {"min_coarse_side", cfg.msssim.min_coarse_side}}},
            {"seed", cfg.seed},
            {"batch_size", cfg.batch_size}};
}

namespace {

ExplainConfig parse_explain(const Json& j, ExplainConfig cfg) {
    reject_unknown(j, {"n_samples", "sampler", "kernel", "ridge", "segments", "msssim", "seed", "batch_size"},
                   "explain config");
    read(j, "n_samples", cfg.n_samples);
    read(j, "seed", cfg.seed);
    read(j, "batch_size", cfg.batch_size);
    if (j.contains("sampler")) cfg.sampler = sampler_from(j["sampler"], cfg.sampler);
    if (j.contains("kernel")) {
        const auto& k = j["kernel"];
        reject_unknown(k, {"sigma", "distance_kind", "perceptual_form"}, "kernel");
        read(k, "sigma", cfg.kernel.sigma);
        if (k.contains("distance_kind"))
            cfg.kernel.distance_kind = distance_kind_from_string(k["distance_kind"].get<std::string>());
        if (k.contains("perceptual_form")) cfg.kernel.perceptual_form = form_from(k["perceptual_form"].get<std::string>());
    }
    if (j.contains("ridge")) cfg.ridge = ridge_from(j["ridge"], cfg.ridge);
    if (j.contains("segments")) {
        const auto& s = j["segments"];
        reject_unknown(s, {"n_segments", "compactness", "max_iters"}, "segments");
        read(s, "n_segments", cfg.segments.n_segments);
        read(s, "compactness", cfg.segments.compactness);
        read(s, "max_iters", cfg.segments.max_iters);
    }
    if (j.contains("msssim")) {
        const auto& m = j["msssim"];
        reject_unknown(m, {"n_scales", "scale_weights", "window_size", "window_sigma", "k1", "k2", "dynamic_range",
                           "min_coarse_side"},
                       "msssim");
        read(m, "n_scales", cfg.msssim.n_scales);
        read(m, "scale_weights", cfg.msssim.scale_weights);
        read(m, "window_size", cfg.msssim.window_size);
        read(m, "window_sigma", cfg.msssim.window_sigma);
        read(m, "k1", cfg.msssim.k1);
        read(m, "k2", cfg.msssim.k2);
        read(m, "dynamic_range", cfg.msssim.dynamic_range);
        read(m, "min_coarse_side", cfg.msssim.min_coarse_side);
    }
    validate(cfg);
    return cfg;
}

}  // namespace

ExplainConfig explain_config_from_json(const Json& j, ExplainConfig base) {
    try {
        return parse_explain(j, std::move(base));
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    } catch (const Json::exception& e) {
        throw ConfigError(e.what());
    }
}

Json to_json(const Synth2DConfig& cfg) {
    return {{"n_train", cfg.n_train},
            {"noise_std", cfg.noise_std},
            {"n_queries", cfg.n_queries},
            {"halfwidth", cfg.halfwidth},
            {"quantile_grid", cfg.quantile_grid},
            {"n_neighbourhood", cfg.n_neighbourhood},
            {"n_true_samples", cfg.n_true_samples},
            {"seed", cfg.seed},
            {"forest", forest_json(cfg.forest)},
            {"ridge", ridge_json(cfg.ridge)}};
}

Synth2DConfig synth2d_config_from_json(const Json& j, Synth2DConfig cfg) {
    reject_unknown(j, {"n_train", "noise_std", "n_queries", "halfwidth", "quantile_grid", "n_neighbourhood",
                       "n_true_samples", "seed", "forest", "ridge"},
                   "synth2d config");
    read(j, "n_train", cfg.n_train);
    read(j, "noise_std", cfg.noise_std);
    read(j, "n_queries", cfg.n_queries);
    read(j, "halfwidth", cfg.halfwidth);
    read(j, "quantile_grid", cfg.quantile_grid);
    read(j, "n_neighbourhood", cfg.n_neighbourhood);
    read(j, "n_true_samples", cfg.n_true_samples);
    read(j, "seed", cfg.seed);
    if (j.contains("forest")) {
        const auto& f = j["forest"];
        reject_unknown(f, {"n_trees", "max_features", "min_samples_leaf", "bootstrap"}, "forest");
        read(f, "n_trees", cfg.forest.n_trees);
        read(f, "max_features", cfg.forest.max_features);
        read(f, "min_samples_leaf", cfg.forest.min_samples_leaf);
        read(f, "bootstrap", cfg.forest.bootstrap);
    }
    if (j.contains("ridge")) cfg.ridge = ridge_from(j["ridge"], cfg.ridge);
    try {
        validate(cfg);
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RobustnessConfig default_robustness_config() {
    RobustnessConfig cfg;
    cfg.samplers = {{SamplerKind::zero, 0.0},  {SamplerKind::mean, 0.0},    {SamplerKind::noise, 0.01},
                    {SamplerKind::noise, 0.05}, {SamplerKind::noise, 0.1},  {SamplerKind::blur, 3},
                    {SamplerKind::blur, 5},     {SamplerKind::blur, 11},    {SamplerKind::contrast, 0.5}};
    cfg.distances = {DistanceKind::cosine_mask, DistanceKind::msssim};
    cfg.distortions = {{SamplerKind::noise, 0.05}, {SamplerKind::blur, 5}, {SamplerKind::contrast, 0.5}};
    cfg.seeds = {0};
    return cfg;
}

std::vector<ExplainConfig> expand(const RobustnessConfig& cfg) {
    std::vector<ExplainConfig> out;
    for (const auto& s : cfg.samplers)
        for (auto d : cfg.distances) {
            ExplainConfig e = cfg.explain;
            e.sampler = s;
            e.kernel.distance_kind = d;
            e.kernel.sigma = d == DistanceKind::cosine_mask ? cfg.sigma_cosine : cfg.sigma_msssim;
            out.push_back(e);
        }
    return out;
}

Json to_json(const RobustnessConfig& cfg) {
    Json samplers = Json::array(), distances = Json::array(), distortions = Json::array();
    for (const auto& s : cfg.samplers) samplers.push_back(to_string(s));
    for (auto d : cfg.distances) distances.push_back(to_string(d));
    for (const auto& d : cfg.distortions) distortions.push_back(to_string(d));
    Json explain = to_json(cfg.explain);
    explain.erase("sampler");
    explain.erase("seed");
    explain["kernel"].erase("sigma");
    explain["kernel"].erase("distance_kind");
    return {{"resize_to", cfg.resize_to},   {"explain", explain},         {"sigma_cosine", cfg.sigma_cosine},
            {"sigma_msssim", cfg.sigma_msssim}, {"samplers", samplers},   {"distances", distances},
            {"distortions", distortions},   {"seeds", cfg.seeds},         {"heatmaps", cfg.heatmaps}};
}

RobustnessConfig robustness_config_from_json(const Json& j, RobustnessConfig cfg) {
    reject_unknown(j, {"resize_to", "explain", "sigma_cosine", "sigma_msssim", "samplers", "distances", "distortions",
                       "seeds", "heatmaps"},
                   "robustness config");
    read(j, "resize_to", cfg.resize_to);
    read(j, "sigma_cosine", cfg.sigma_cosine);
    read(j, "sigma_msssim", cfg.sigma_msssim);
    read(j, "seeds", cfg.seeds);
    read(j, "heatmaps", cfg.heatmaps);
    if (j.contains("explain")) cfg.explain = explain_config_from_json(j["explain"], cfg.explain);
    try {
        if (j.contains("samplers")) {
            cfg.samplers.clear();
            for (const auto& s : j["samplers"]) cfg.samplers.push_back(sampler_from(s));
        }
        if (j.contains("distances")) {
            cfg.distances.clear();
            for (const auto& d : j["distances"]) cfg.distances.push_back(distance_kind_from_string(d.get<std::string>()));
        }
        if (j.contains("distortions")) {
            cfg.distortions.clear();
            for (const auto& d : j["distortions"]) cfg.distortions.push_back(sampler_from(d));
        }
        for (const auto& s : cfg.samplers) validate(s);
        for (const auto& d : cfg.distortions) validate(d);
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    } catch (const Json::exception& e) {
        throw ConfigError(e.what());
    }
    if (cfg.resize_to == 0) throw ConfigError("resize_to must be positive");
    if (cfg.seeds.empty()) throw ConfigError("seeds must not be empty");
    return cfg;
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_json_file(const Json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace alime
