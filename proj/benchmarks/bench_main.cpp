#include <benchmark/benchmark.h>

#include <random>

#include "alime/blackbox.hpp"
#include "alime/forest.hpp"
#include "alime/imagexp.hpp"
#include "alime/metrics.hpp"
#include "alime/perturb.hpp"
#include "alime/ridge.hpp"
#include "alime/segment.hpp"
#include "alime/surrogate.hpp"
#include "alime/synth2d.hpp"

using namespace alime;

static void BM_Slic(benchmark::State& state) {
    const auto size = static_cast<std::size_t>(state.range(0));
    const Image img = textured_image(size, 0);
    for (auto _ : state) benchmark::DoNotOptimize(slic_segment(img, {50, 10.0, 10, 0}));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(size * size));
}
BENCHMARK(BM_Slic)->Arg(64)->Arg(128)->Arg(224)->Unit(benchmark::kMillisecond);

static void BM_Msssim(benchmark::State& state) {
    const auto size = static_cast<std::size_t>(state.range(0));
    const Image a = textured_image(size, 1);
    const Image b = distort(a, {SamplerKind::blur, 5}, 0);
    const MsssimReference ref(a);
    for (auto _ : state) benchmark::DoNotOptimize(ref.similarity(b));
}
BENCHMARK(BM_Msssim)->Arg(64)->Arg(128)->Arg(224)->Unit(benchmark::kMicrosecond);

static void BM_Realize(benchmark::State& state) {
    const Image img = textured_image(224, 2);
    const auto seg = slic_segment(img, {50, 10.0, 10, 0});
    const Realizer realizer(img, seg, {static_cast<SamplerKind>(state.range(0)), state.range(0) == 3 ? 5.0 : 0.05});
    const auto masks = sample_masks(64, seg.n_segments(), 1);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(realizer.realize(masks[i % masks.size()], i));
        ++i;
    }
}
BENCHMARK(BM_Realize)->DenseRange(0, 4)->Unit(benchmark::kMicrosecond);

static void BM_Ridge(benchmark::State& state) {
    const auto n = state.range(0), d = state.range(1);
    std::mt19937 rng(0);
    std::normal_distribution<double> g;
    Matrix X(n, d);
    std::vector<double> y(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) X(i, j) = rng() % 2;
        y[static_cast<std::size_t>(i)] = g(rng);
        w[static_cast<std::size_t>(i)] = std::abs(g(rng));
    }
    for (auto _ : state) benchmark::DoNotOptimize(fit_weighted_ridge(X, y, w, {}));
}
BENCHMARK(BM_Ridge)->Args({1000, 50})->Args({1000, 200})->Unit(benchmark::kMicrosecond);

static void BM_ForestTrain(benchmark::State& state) {
    const auto data = two_moons(static_cast<std::size_t>(state.range(0)), 0.35, 0);
    for (auto _ : state) benchmark::DoNotOptimize(train_forest(data.points, data.labels, {.n_trees = 100}));
}
BENCHMARK(BM_ForestTrain)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_ForestPredict(benchmark::State& state) {
    const auto data = two_moons(2000, 0.35, 0);
    Forest forest = train_forest(data.points, data.labels, {.n_trees = 100});
    const auto queries = two_moons(500, 0.35, 1);
    for (auto _ : state) benchmark::DoNotOptimize(forest.predict_points(queries.points));
}
BENCHMARK(BM_ForestPredict)->Unit(benchmark::kMillisecond);

static void BM_ExplainImage(benchmark::State& state) {
    const Image img = textured_image(64, 3);
    auto bb = builtin_quadrant_classifier();
    ExplainConfig cfg;
    cfg.n_samples = 200;
    cfg.segments.n_segments = 30;
    cfg.kernel.distance_kind = static_cast<DistanceKind>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(explain_image(img, *bb, cfg));
}
BENCHMARK(BM_ExplainImage)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
