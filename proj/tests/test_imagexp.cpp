#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "alime/error.hpp"
#include "alime/image_io.hpp"
#include "alime/imagexp.hpp"

using namespace alime;

namespace {

std::vector<ExplainConfig> small_grid() {
    std::vector<ExplainConfig> out;
    for (auto sampler : {SamplerSpec{SamplerKind::mean, 0}, SamplerSpec{SamplerKind::blur, 5}})
        for (auto kind : {DistanceKind::cosine_mask, DistanceKind::msssim}) {
            ExplainConfig c;
            c.n_samples = 40;
            c.segments.n_segments = 8;
            c.sampler = sampler;
            c.kernel.distance_kind = kind;
            out.push_back(c);
        }
    return out;
}

std::vector<PairRecord> small_pairs(std::vector<DistortionSpec> distortions) {
    const std::vector<Image> images{textured_image(48, 0), textured_image(48, 1)};
    const std::vector<std::string> ids{"a", "b"};
    return build_pairs(images, ids, distortions, 48, 5);
}

}  // namespace

TEST(BuildPairs, OnePairPerImageAndDistortion) {
    const std::vector<DistortionSpec> d{{SamplerKind::noise, 0.05}, {SamplerKind::blur, 5}, {SamplerKind::contrast, 0.5}};
    const std::vector<Image> images{textured_image(40, 0), textured_image(30, 1)};
    const std::vector<std::string> ids{"x", "y"};
    const auto pairs = build_pairs(images, ids, d, 32, 0);
    ASSERT_EQ(pairs.size(), 6u);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        EXPECT_EQ(pairs[i].source_id, ids[i / 3]);
        EXPECT_EQ(pairs[i].distortion, d[i % 3]);
        EXPECT_EQ(pairs[i].reference.width(), 32u);
        EXPECT_TRUE(pairs[i].distorted.same_shape(pairs[i].reference));
        EXPECT_NE(pairs[i].distorted, pairs[i].reference);
    }
    EXPECT_EQ(pairs[0].reference, pairs[2].reference);
    EXPECT_THROW(build_pairs(images, ids, d, 0, 0), ParameterError);
    EXPECT_THROW(build_pairs(images, std::vector<std::string>{"x"}, d, 32, 0), DimensionError);
}

TEST(BuildPairs, DirectorySkipsUndecodableFiles) {
    const auto dir = std::filesystem::temp_directory_path() / ("alime_pairs_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    write_png(textured_image(20, 3), dir / "b.png");
    write_pnm(textured_image(20, 4), dir / "a.ppm");
    std::ofstream(dir / "notes.txt") << "not an image";
    const std::vector<DistortionSpec> d{{SamplerKind::blur, 3}};
    const auto pairs = build_pairs(dir, d, 16, 0);
    std::filesystem::remove_all(dir);
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0].source_id, "a");
    EXPECT_EQ(pairs[1].source_id, "b");
    EXPECT_THROW(build_pairs(dir, d, 16, 0), IoError);
}

TEST(Robustness, IdentityDistortionGivesZeroDexp) {
    const auto pairs = small_pairs({{SamplerKind::contrast, 1.0}});
    auto bb = builtin_quadrant_classifier();
    const auto res = run_robustness(pairs, small_grid(), *bb, 0);
    ASSERT_EQ(res.rows.size(), 4u);
    for (const auto& row : res.rows) {
        EXPECT_EQ(row.mean_dexp, 0.0);
        EXPECT_EQ(row.count, 2u);
        EXPECT_EQ(row.normalized, 1.0);
    }
    EXPECT_EQ(res.diagnostics.failures, 0u);
}

TEST(Robustness, BaselineIsOneAndRatiosIgnoreMapScale) {
    const auto pairs = small_pairs({{SamplerKind::noise, 0.05}, {SamplerKind::blur, 5}});
    auto bb = builtin_quadrant_classifier();
    const std::vector<std::uint64_t> seeds{0, 1};
    const auto a = run_robustness(pairs, small_grid(), *bb, seeds);
    RobustnessOptions opts;
    opts.map_scale = 3.0;
    opts.threads = 3;
    const auto b = run_robustness(pairs, small_grid(), *bb, seeds, opts);
    ASSERT_EQ(a.rows.size(), 8u);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].count, 4u);
        EXPECT_NEAR(b.rows[i].mean_dexp, 9.0 * a.rows[i].mean_dexp, 1e-12 * (1 + b.rows[i].mean_dexp));
        EXPECT_NEAR(b.rows[i].normalized, a.rows[i].normalized, 1e-12);
    }
    for (const char* d : {"noise@0.05", "blur@5"}) {
        const auto* base = a.find("mean", "cosine_mask", d);
        ASSERT_NE(base, nullptr);
        EXPECT_EQ(base->normalized, 1.0);
        const auto* other = a.find("blur@5", "msssim", d);
        ASSERT_NE(other, nullptr);
        EXPECT_DOUBLE_EQ(other->normalized, other->mean_dexp / base->mean_dexp);
    }
}

TEST(Robustness, DeterministicAcrossThreads) {
    const auto pairs = small_pairs({{SamplerKind::noise, 0.05}});
    auto bb = builtin_quadrant_classifier();
    const auto a = run_robustness(pairs, small_grid(), *bb, 7);
    RobustnessOptions opts;
    opts.threads = 4;
    const auto b = run_robustness(pairs, small_grid(), *bb, 7, opts);
    for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].mean_dexp, b.rows[i].mean_dexp);
}

TEST(Robustness, RequiresBaselineAndSeeds) {
    const auto pairs = small_pairs({{SamplerKind::blur, 3}});
    auto bb = builtin_quadrant_classifier();
    auto grid = small_grid();
    grid.erase(grid.begin());
    EXPECT_THROW(run_robustness(pairs, grid, *bb, 0), ConfigError);
    EXPECT_THROW(run_robustness(pairs, small_grid(), *bb, std::span<const std::uint64_t>{}), ConfigError);
    EXPECT_THROW(run_robustness({}, small_grid(), *bb, 0), ParameterError);
}

TEST(Robustness, FailuresAreCountedNotFatal) {
    const auto pairs = small_pairs({{SamplerKind::blur, 3}});
    auto bb = constant_blackbox({0.5, 0.5}, InputKind::point2d);
    const auto res = run_robustness(pairs, small_grid(), *bb, 0);
    EXPECT_EQ(res.diagnostics.failures, 8u);
    EXPECT_EQ(res.diagnostics.failure_messages.size(), 8u);
    EXPECT_TRUE(res.rows.empty());
}

TEST(Robustness, HeatmapsAreWritten) {
    const auto dir = std::filesystem::temp_directory_path() / ("alime_heat_" + std::to_string(::getpid()));
    const auto pairs = small_pairs({{SamplerKind::blur, 3}});
    auto bb = builtin_quadrant_classifier();
    RobustnessOptions opts;
    opts.heatmap_dir = dir;
    run_robustness(pairs, small_grid(), *bb, 0, opts);
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++n;
    std::filesystem::remove_all(dir);
    EXPECT_EQ(n, 2u * 4u * 2u);
}

TEST(Heatmap, ZeroMapReproducesSource) {
    const Image img = textured_image(16, 2);
    const RelevanceMap zero{16, 16, std::vector<double>(256, 0.0)};
    EXPECT_EQ(render_heatmap(img, zero), img);
}

TEST(Heatmap, SignsAndOpacity) {
    const Image gray(2, 1, 1, 0.5f);
    const RelevanceMap map{2, 1, {2.0, -1.0}};
    const Image out = render_heatmap(gray, map);
    ASSERT_EQ(out.channels(), 3u);
    EXPECT_FLOAT_EQ(out.at(0, 0, 1), 0.75f);  // opacity 0.5 toward green
    EXPECT_FLOAT_EQ(out.at(0, 0, 0), 0.25f);
    EXPECT_FLOAT_EQ(out.at(0, 1, 0), 0.625f);  // opacity 0.25 toward red
    EXPECT_FLOAT_EQ(out.at(0, 1, 1), 0.375f);
    EXPECT_EQ(render_heatmap(gray, map), out);
    EXPECT_THROW(render_heatmap(gray, RelevanceMap{1, 1, {0.0}}), DimensionError);
}

TEST(TexturedImage, BundledImagesMatchGenerator) {
    for (std::size_t i = 0; i < 6; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "texture_%02zu.png", i);
        const Image disk = read_image(std::filesystem::path(ALIME_DATA_DIR) / name);
        const Image gen = textured_image(64, i);
        ASSERT_TRUE(disk.same_shape(gen));
        for (std::size_t k = 0; k < gen.data().size(); ++k)
            ASSERT_NEAR(disk.data()[k], gen.data()[k], 0.5 / 255.0 + 1e-6);
    }
    EXPECT_EQ(textured_image(32, 1), textured_image(32, 1));
    EXPECT_NE(textured_image(32, 1), textured_image(32, 2));
}
