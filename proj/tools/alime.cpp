// alime command-line entry point.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "alime/blackbox.hpp"
#include "alime/config.hpp"
#include "alime/csv.hpp"
#include "alime/error.hpp"
#include "alime/image_io.hpp"
#include "alime/imagexp.hpp"
#include "alime/metrics.hpp"
#include "alime/parallel.hpp"
#include "alime/perturb.hpp"
#include "alime/segment.hpp"
#include "alime/surrogate.hpp"
#include "alime/synth2d.hpp"

namespace fs = std::filesystem;
using namespace alime;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out;
    std::size_t threads = default_threads();
    std::string blackbox = "builtin:quadrant";
    std::string log_level = "warn";
};

/// Accepts either a bare config or a sidecar written by an earlier run; run-level
/// inputs recorded in a sidecar still come from the command line.
Json load_config(const Globals& g) {
    if (g.config.empty()) return Json::object();
    Json j = read_json_file(g.config);
    if (j.is_object() && j.contains("command") && j.contains("config")) {
        Json inner = j.at("config");
        for (const char* key : {"blackbox", "image", "images"}) inner.erase(key);
        return inner;
    }
    return j;
}

// Sidecar next to a file output, or inside a directory output.
void write_sidecar(const fs::path& out, bool out_is_dir, const std::string& command, Json config,
                   const Globals& g, Json extra = Json::object()) {
    Json side = {{"command", command}, {"config", std::move(config)}, {"threads", g.threads}};
    if (!extra.empty()) side["diagnostics"] = std::move(extra);
    const fs::path path = out_is_dir ? out / "config.json" : fs::path(out.string() + ".config.json");
    write_json_file(side, path);
}

void ensure_parent(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// ---- synth2d --------------------------------------------------------------

struct Synth2DArgs {
    std::optional<std::size_t> n_queries, n_train, n_neighbourhood, n_trees;
    std::string scatter_dir;
};

void plot_points(Image& img, const Matrix& pts, std::array<float, 3> color, double x0, double x1, double y0,
                 double y1) {
    const auto w = static_cast<double>(img.width()), h = static_cast<double>(img.height());
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        const double cx = (pts(i, 0) - x0) / (x1 - x0) * (w - 1);
        const double cy = (1.0 - (pts(i, 1) - y0) / (y1 - y0)) * (h - 1);
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const long px = std::lround(cx) + dx, py = std::lround(cy) + dy;
                if (px < 0 || py < 0 || px >= static_cast<long>(w) || py >= static_cast<long>(h)) continue;
                for (std::size_t c = 0; c < 3; ++c) img.at(py, px, c) = color[c];
            }
    }
}

// Training data in gray, the first query's neighbourhood in blue, the query in red.
void write_scatters(const Synth2DConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    const auto train = two_moons(cfg.n_train, cfg.noise_std, derive_seed(cfg.seed, {1}));
    const auto test = two_moons(cfg.n_queries, cfg.noise_std, derive_seed(cfg.seed, {3}));
    const Vector query = test.points.row(0).transpose();
    for (std::size_t g = 0; g < cfg.quantile_grid.size(); ++g) {
        const std::size_t m = cfg.quantile_grid[g];
        const auto qt = fit_quantile_transform(train.points, m);
        const Matrix hood = sample_neighbourhood_2d(qt, query, cfg.halfwidth, cfg.n_neighbourhood,
                                                    derive_seed(cfg.seed, {4, 0, m}));
        Image img(400, 300, 3, 1.0f);
        plot_points(img, train.points, {0.75f, 0.75f, 0.75f}, -2.0, 3.0, -1.75, 2.0);
        plot_points(img, hood, {0.1f, 0.3f, 0.9f}, -2.0, 3.0, -1.75, 2.0);
        Matrix q(1, 2);
        q.row(0) = query.transpose();
        plot_points(img, q, {0.9f, 0.1f, 0.1f}, -2.0, 3.0, -1.75, 2.0);
        write_png(img, dir / fmt::format("scatter_q{:03}.png", m));
    }
}

int run_synth2d(const Globals& g, const Synth2DArgs& a) {
    auto cfg = synth2d_config_from_json(load_config(g));
    if (g.seed) cfg.seed = *g.seed;
    if (a.n_queries) cfg.n_queries = *a.n_queries;
    if (a.n_train) cfg.n_train = *a.n_train;
    if (a.n_neighbourhood) cfg.n_neighbourhood = *a.n_neighbourhood;
    if (a.n_trees) cfg.forest.n_trees = *a.n_trees;
    cfg.threads = g.threads;
    validate(cfg);

    const auto result = run_synth_experiment(cfg);
    CsvWriter csv({"n_quantiles", "mean_wasserstein", "mean_param_distance", "n_effective_queries"});
    for (const auto& r : result.rows)
        csv.add_row({std::to_string(r.n_quantiles), CsvWriter::number(r.mean_wasserstein),
                     CsvWriter::number(r.mean_param_distance), std::to_string(r.n_effective_queries)});
    const fs::path out = g.out.empty() ? fs::path("synth2d.csv") : fs::path(g.out);
    ensure_parent(out);
    csv.write(out);
    write_sidecar(out, false, "synth2d", to_json(cfg), g,
                  {{"skipped_queries", result.skipped_queries},
                   {"forest_train_accuracy", result.forest_train_accuracy}});
    if (!a.scatter_dir.empty()) write_scatters(cfg, a.scatter_dir);
    return 0;
}

// ---- robustness -----------------------------------------------------------

struct RobustnessArgs {
    std::string images;
    std::optional<std::size_t> n_samples, resize_to, n_segments;
    std::vector<std::uint64_t> seeds;
    bool heatmaps = false;
};

int run_robustness_cmd(const Globals& g, const RobustnessArgs& a) {
    auto cfg = robustness_config_from_json(load_config(g));
    if (a.n_samples) cfg.explain.n_samples = *a.n_samples;
    if (a.resize_to) cfg.resize_to = *a.resize_to;
    if (a.n_segments) cfg.explain.segments.n_segments = *a.n_segments;
    if (!a.seeds.empty())
        cfg.seeds = a.seeds;
    else if (g.seed)
        cfg.seeds = {*g.seed};
    if (a.heatmaps) cfg.heatmaps = true;
    validate(cfg.explain);

    const fs::path out = g.out.empty() ? fs::path("robustness") : fs::path(g.out);
    fs::create_directories(out);
    const auto pairs = build_pairs(a.images, cfg.distortions, cfg.resize_to, cfg.seeds.front());
    if (pairs.empty()) throw IoError("no readable images in " + a.images);
    auto bb = make_blackbox(g.blackbox, InputKind::image);
    RobustnessOptions opts;
    opts.threads = g.threads;
    if (cfg.heatmaps) opts.heatmap_dir = out / "heatmaps";
    const auto configs = expand(cfg);
    const auto result = run_robustness(pairs, configs, *bb, cfg.seeds, opts);

    CsvWriter results({"sampler", "distance", "distortion", "mean_dexp", "count"});
    CsvWriter normalized({"sampler", "distance", "distortion", "normalized"});
    for (const auto& r : result.rows) {
        results.add_row({r.sampler, r.distance, r.distortion, CsvWriter::number(r.mean_dexp), std::to_string(r.count)});
        normalized.add_row({r.sampler, r.distance, r.distortion, CsvWriter::number(r.normalized)});
    }
    results.write(out / "results.csv");
    normalized.write(out / "normalized.csv");
    const auto& d = result.diagnostics;
    const Json diag = {{"pairs", pairs.size()},
                       {"failures", d.failures},
                       {"failure_messages", d.failure_messages},
                       {"class_divergences", d.class_divergences},
                       {"single_segment_explanations", d.single_segment_explanations}};
    write_json_file(diag, out / "diagnostics.json");
    Json resolved = to_json(cfg);
    resolved["blackbox"] = g.blackbox;
    resolved["images"] = a.images;
    write_sidecar(out, true, "robustness", resolved, g);
    return 0;
}

// ---- explain --------------------------------------------------------------

struct ExplainArgs {
    std::string image;
    std::string sampler, distance;
    std::optional<std::size_t> n_samples, n_segments, resize_to;
    std::optional<double> sigma;
};

int run_explain(const Globals& g, const ExplainArgs& a) {
    auto cfg = explain_config_from_json(load_config(g));
    if (g.seed) cfg.seed = *g.seed;
    if (!a.sampler.empty()) cfg.sampler = sampler_spec_from_string(a.sampler);
    if (!a.distance.empty()) cfg.kernel.distance_kind = distance_kind_from_string(a.distance);
    if (a.n_samples) cfg.n_samples = *a.n_samples;
    if (a.n_segments) cfg.segments.n_segments = *a.n_segments;
    if (a.sigma) cfg.kernel.sigma = *a.sigma;
    cfg.threads = g.threads;
    validate(cfg);

    Image image = read_image(a.image);
    if (a.resize_to) image = resize_bilinear(image, *a.resize_to, *a.resize_to);
    auto bb = make_blackbox(g.blackbox, InputKind::image);
    const auto result = explain_image(image, *bb, cfg);

    const fs::path out = g.out.empty() ? fs::path("explanation") : fs::path(g.out);
    fs::create_directories(out);
    {
        std::ofstream f(out / "explanation.json");
        f << explanation_to_json(result.explanation) << '\n';
        if (!f) throw IoError("cannot write " + (out / "explanation.json").string());
    }
    render_heatmap(image, project_explanation(result.explanation, result.segmentation), out / "heatmap.png");
    Json resolved = to_json(cfg);
    resolved["blackbox"] = g.blackbox;
    resolved["image"] = a.image;
    write_sidecar(out, true, "explain", resolved, g);
    return 0;
}

// ---- distort / metric / segment -------------------------------------------

int run_distort(const Globals& g, const std::string& in, const std::string& spec_text) {
    if (g.out.empty()) throw CLI::RequiredError("--out");
    const auto spec = sampler_spec_from_string(spec_text);
    validate(spec);
    const std::uint64_t seed = g.seed.value_or(0);
    const Image out = distort(read_image(in), spec, seed);
    ensure_parent(g.out);
    write_png(out, g.out);
    write_sidecar(g.out, false, "distort", {{"input", in}, {"distortion", to_string(spec)}, {"seed", seed}}, g);
    return 0;
}

int run_metric(const Globals& g, const std::string& a, const std::string& b) {
    auto cfg = explain_config_from_json(load_config(g));
    const Image x = read_image(a), y = read_image(b);
    const double sim = msssim(x, y, cfg.msssim);
    const Json result = {{"msssim", sim}, {"distance", perceptual_distance(x, y, cfg.msssim)}};
    std::cout << result.dump() << '\n';
    if (!g.out.empty()) {
        ensure_parent(g.out);
        write_json_file(result, g.out);
        write_sidecar(g.out, false, "metric", {{"a", a}, {"b", b}, {"msssim", to_json(cfg)["msssim"]}}, g);
    }
    return 0;
}

int run_segment(const Globals& g, const std::string& in, std::optional<std::size_t> n_segments,
                std::optional<double> compactness) {
    auto cfg = explain_config_from_json(load_config(g));
    if (n_segments) cfg.segments.n_segments = *n_segments;
    if (compactness) cfg.segments.compactness = *compactness;
    if (g.seed) cfg.segments.seed = *g.seed;
    validate(cfg);
    const Image image = read_image(in);
    const auto seg = slic_segment(image, cfg.segments);
    const fs::path out = g.out.empty() ? fs::path("segments") : fs::path(g.out);
    fs::create_directories(out);
    write_png(draw_boundaries(image, seg), out / "boundaries.png");
    const std::vector<int> labels(seg.labels().begin(), seg.labels().end());
    write_pgm16(labels, seg.width(), seg.height(), std::max<int>(1, static_cast<int>(seg.n_segments()) - 1),
                out / "labels.pgm");
    write_sidecar(out, true, "segment",
                  {{"input", in},
                   {"n_segments", cfg.segments.n_segments},
                   {"compactness", cfg.segments.compactness},
                   {"max_iters", cfg.segments.max_iters},
                   {"produced_segments", seg.n_segments()}},
                  g);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Surrogate explanations with natural-image-aligned sampling"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Master seed");
    app.add_option("--config", g.config, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "Output file or directory");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--blackbox", g.blackbox, "builtin:quadrant, builtin:meanpixel or cmd:\"...\"");
    app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off");

    Synth2DArgs sa;
    auto* synth = app.add_subcommand("synth2d", "Two-moons quantile sampling study");
    synth->add_option("--n-queries", sa.n_queries);
    synth->add_option("--n-train", sa.n_train);
    synth->add_option("--n-neighbourhood", sa.n_neighbourhood);
    synth->add_option("--n-trees", sa.n_trees);
    synth->add_option("--scatter", sa.scatter_dir, "Directory for neighbourhood scatter plots");

    RobustnessArgs ra;
    auto* robust = app.add_subcommand("robustness", "Explanation robustness under image distortions");
    robust->add_option("--images", ra.images, "Directory of source images")->required()->check(CLI::ExistingDirectory);
    robust->add_option("--n-samples", ra.n_samples);
    robust->add_option("--resize", ra.resize_to);
    robust->add_option("--n-segments", ra.n_segments);
    robust->add_option("--seeds", ra.seeds, "Seeds to average over");
    robust->add_flag("--heatmaps", ra.heatmaps);

    ExplainArgs ea;
    auto* explain = app.add_subcommand("explain", "Explain one image");
    explain->add_option("image", ea.image)->required()->check(CLI::ExistingFile);
    explain->add_option("--sampler", ea.sampler, "e.g. mean, zero, noise@0.05, blur@5, contrast@0.5");
    explain->add_option("--distance", ea.distance, "cosine or msssim");
    explain->add_option("--n-samples", ea.n_samples);
    explain->add_option("--n-segments", ea.n_segments);
    explain->add_option("--sigma", ea.sigma);
    explain->add_option("--resize", ea.resize_to);

    std::string distort_in, distort_spec;
    auto* dist = app.add_subcommand("distort", "Apply a whole-image distortion");
    dist->add_option("image", distort_in)->required()->check(CLI::ExistingFile);
    dist->add_option("--distortion", distort_spec, "noise@L, blur@K or contrast@C")->required();

    std::string metric_a, metric_b;
    auto* metric = app.add_subcommand("metric", "MS-SSIM between two images");
    metric->add_option("a", metric_a)->required()->check(CLI::ExistingFile);
    metric->add_option("b", metric_b)->required()->check(CLI::ExistingFile);

    std::string segment_in;
    std::optional<std::size_t> seg_n;
    std::optional<double> seg_m;
    auto* segment = app.add_subcommand("segment", "SLIC superpixels");
    segment->add_option("image", segment_in)->required()->check(CLI::ExistingFile);
    segment->add_option("--n-segments", seg_n);
    segment->add_option("--compactness", seg_m);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        auto subs = app.get_subcommands();
        std::cerr << (subs.empty() ? app.help() : subs.front()->help());
        return 1;
    }

    spdlog::set_default_logger(spdlog::stderr_color_mt("alime"));
    spdlog::set_level(spdlog::level::from_str(g.log_level));
    try {
        if (*synth) return run_synth2d(g, sa);
        if (*robust) return run_robustness_cmd(g, ra);
        if (*explain) return run_explain(g, ea);
        if (*dist) return run_distort(g, distort_in, distort_spec);
        if (*metric) return run_metric(g, metric_a, metric_b);
        if (*segment) return run_segment(g, segment_in, seg_n, seg_m);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
