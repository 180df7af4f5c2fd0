#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "alime/error.hpp"
#include "alime/imagexp.hpp"
#include "alime/metrics.hpp"
#include "alime/perturb.hpp"

using namespace alime;

namespace {

Image random_gray(std::size_t w, std::size_t h, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::vector<float> data(w * h);
    for (auto& v : data) v = u(rng);
    return Image(w, h, 1, data);
}

// Direct single-scale SSIM with an 11x11 Gaussian window, valid positions only.
double ssim_reference(const Image& x, const Image& y) {
    const int k = 11, half = 5;
    double g[11], gs = 0.0;
    for (int i = 0; i < k; ++i) gs += g[i] = std::exp(-double((i - half) * (i - half)) / (2.0 * 1.5 * 1.5));
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double total = 0.0;
    int count = 0;
    for (std::size_t r = 0; r + k <= x.height(); ++r)
        for (std::size_t c = 0; c + k <= x.width(); ++c) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) {
                    const double wgt = g[i] * g[j] / (gs * gs);
                    const double a = x.at(r + i, c + j), b = y.at(r + i, c + j);
                    mx += wgt * a;
                    my += wgt * b;
                    sxx += wgt * a * a;
                    syy += wgt * b * b;
                    sxy += wgt * a * b;
                }
            const double vx = sxx - mx * mx, vy = syy - my * my, cov = sxy - mx * my;
            total += (2 * mx * my + c1) * (2 * cov + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    return total / count;
}

RelevanceMap map_of(std::size_t w, std::size_t h, std::vector<double> v) { return {w, h, std::move(v)}; }

}  // namespace

TEST(CosineMaskDistance, Examples) {
    EXPECT_DOUBLE_EQ(cosine_mask_distance({1, 1, 1, 1}), 0.0);
    EXPECT_DOUBLE_EQ(cosine_mask_distance({0, 0, 0, 0}), 1.0);
    EXPECT_DOUBLE_EQ(cosine_mask_distance({1, 0, 0, 0}), 0.5);
    EXPECT_DOUBLE_EQ(cosine_mask_distance({1, 1, 0, 0, 0, 0, 0, 0}), 0.5);
    EXPECT_THROW(cosine_mask_distance({}), ParameterError);
}

TEST(ExponentialKernel, Examples) {
    EXPECT_DOUBLE_EQ(exponential_kernel(0.0, 0.3), 1.0);
    EXPECT_DOUBLE_EQ(exponential_kernel(0.25, 0.25), std::exp(-1.0));
    EXPECT_DOUBLE_EQ(exponential_kernel(1.0, 0.5), std::exp(-4.0));
    EXPECT_THROW(exponential_kernel(0.1, 0.0), ParameterError);
}

TEST(Msssim, CanonicalWeightsSumToOne) {
    const auto w = canonical_msssim_weights();
    ASSERT_EQ(w.size(), 5u);
    EXPECT_NEAR(w[0] + w[1] + w[2] + w[3] + w[4], 1.0, 1e-12);
    EXPECT_NEAR(w[2] / w[0], 0.3001 / 0.0448, 1e-12);
    EXPECT_NO_THROW(validate(MsssimConfig{}));
}

TEST(Msssim, ConfigValidation) {
    MsssimConfig c;
    c.scale_weights = {0.2, 0.2, 0.2, 0.2, 0.1};
    EXPECT_THROW(validate(c), ParameterError);
    c = {};
    c.window_size = 10;
    EXPECT_THROW(validate(c), ParameterError);
    c = {};
    c.n_scales = 3;
    EXPECT_THROW(validate(c), ParameterError);
    c.scale_weights = {0.5, 0.25, 0.25};
    EXPECT_NO_THROW(validate(c));
}

TEST(Msssim, SelfSimilarityIsExactlyOne) {
    for (std::uint32_t s = 0; s < 5; ++s) {
        const Image img = random_gray(48 + 7 * s, 50 + 3 * s, s);
        EXPECT_EQ(msssim(img, img), 1.0);
        EXPECT_EQ(perceptual_distance(img, img), 0.0);
    }
}

TEST(Msssim, Symmetric) {
    const Image a = textured_image(64, 1), b = distort(a, {SamplerKind::noise, 0.1}, 3);
    EXPECT_NEAR(msssim(a, b), msssim(b, a), 1e-12);
}

TEST(Msssim, SingleScaleMatchesDirectSsim) {
    MsssimConfig one;
    one.n_scales = 1;
    one.scale_weights = {1.0};
    for (std::uint32_t s = 0; s < 3; ++s) {
        const Image a = random_gray(24, 20, s), b = random_gray(24, 20, s + 100);
        const Image c = distort(a, {SamplerKind::blur, 3}, 0);
        const Image d = distort(a, {SamplerKind::noise, 0.1}, s);
        // Independent noise images can score below zero; negative terms are clamped.
        EXPECT_NEAR(msssim(a, b, one), std::max(0.0, ssim_reference(a, b)), 1e-10);
        EXPECT_NEAR(msssim(a, c, one), ssim_reference(a, c), 1e-10);
        EXPECT_NEAR(msssim(a, d, one), ssim_reference(a, d), 1e-10);
        EXPECT_GT(ssim_reference(a, d), 0.0);
    }
}

TEST(Msssim, ConstantImagesReduceToCoarseLuminance) {
    const Image a(48, 48, 1, 0.25f), b(48, 48, 1, 0.75f);
    const double c1 = 1e-4;
    const double lum = (2 * 0.25 * 0.75 + c1) / (0.25 * 0.25 + 0.75 * 0.75 + c1);
    EXPECT_NEAR(msssim(a, b), std::pow(lum, canonical_msssim_weights()[4]), 1e-9);
}

TEST(Msssim, ColorUsesLuminance) {
    const Image rgb = textured_image(64, 2);
    const auto luma = luminance(rgb);
    const Image gray(64, 64, 1, std::vector<float>(luma.begin(), luma.end()));
    const Image rgb2 = distort(rgb, {SamplerKind::blur, 5}, 0);
    const auto luma2 = luminance(rgb2);
    const Image gray2(64, 64, 1, std::vector<float>(luma2.begin(), luma2.end()));
    EXPECT_NEAR(msssim(rgb, rgb2), msssim(gray, gray2), 1e-6);
}

TEST(Msssim, SizeRequirements) {
    EXPECT_NO_THROW(msssim(random_gray(48, 48, 0), random_gray(48, 48, 1)));
    EXPECT_THROW(msssim(random_gray(47, 64, 0), random_gray(47, 64, 1)), ParameterError);
    EXPECT_THROW(msssim(random_gray(64, 64, 0), random_gray(64, 60, 1)), ParameterError);
}

TEST(Msssim, ReferenceMatchesFreeFunction) {
    const Image a = textured_image(64, 4);
    const MsssimReference ref(a);
    for (double level : {0.01, 0.05, 0.2}) {
        const Image b = distort(a, {SamplerKind::noise, level}, 9);
        EXPECT_EQ(ref.similarity(b), msssim(a, b));
    }
}

TEST(Msssim, DecreasesWithDistortionStrength) {
    const Image a = textured_image(96, 5);
    double prev = 1.0;
    for (double k : {3.0, 7.0, 15.0}) {
        const double s = msssim(a, distort(a, {SamplerKind::blur, k}, 0));
        EXPECT_LT(s, prev);
        prev = s;
    }
}

TEST(ExplanationDistance, Examples) {
    const std::vector<RelevanceMap> a{map_of(2, 1, {1, 2})}, b{map_of(2, 1, {0, 0})};
    EXPECT_DOUBLE_EQ(explanation_distance(a, b), 5.0);
    EXPECT_DOUBLE_EQ(explanation_distance(a, a), 0.0);
    const std::vector<RelevanceMap> a2{map_of(2, 1, {1, 2}), map_of(2, 1, {3, 0})};
    const std::vector<RelevanceMap> b2{map_of(2, 1, {0, 0}), map_of(2, 1, {0, 0})};
    EXPECT_DOUBLE_EQ(explanation_distance(a2, b2), 7.0);
}

TEST(ExplanationDistance, QuadraticInScale) {
    std::mt19937 rng(1);
    std::normal_distribution<double> g;
    std::vector<double> va(12), vb(12);
    for (auto& v : va) v = g(rng);
    for (auto& v : vb) v = g(rng);
    const double base = explanation_distance(std::vector{map_of(4, 3, va)}, std::vector{map_of(4, 3, vb)});
    for (double c : {0.5, 3.0, -2.0}) {
        auto sa = va, sb = vb;
        for (auto& v : sa) v *= c;
        for (auto& v : sb) v *= c;
        EXPECT_NEAR(explanation_distance(std::vector{map_of(4, 3, sa)}, std::vector{map_of(4, 3, sb)}), c * c * base,
                    1e-12 * (1 + base));
    }
}

TEST(ExplanationDistance, ShapeErrors) {
    const std::vector<RelevanceMap> a{map_of(2, 1, {1, 2})}, b{map_of(1, 2, {1, 2})};
    EXPECT_THROW(explanation_distance(a, b), DimensionError);
    EXPECT_THROW(explanation_distance({}, {}), DimensionError);
}

TEST(Wasserstein, Examples) {
    EXPECT_DOUBLE_EQ(wasserstein_1d(std::vector{0.0, 1.0}, std::vector{2.0, 3.0}), 2.0);
    EXPECT_DOUBLE_EQ(wasserstein_1d(std::vector{3.0, 0.0}, std::vector{0.0, 3.0}), 0.0);
    EXPECT_DOUBLE_EQ(wasserstein_1d(std::vector{0.0}, std::vector{0.0, 1.0}), 0.5);
    EXPECT_NEAR(wasserstein_1d(std::vector{0.0, 1.0, 2.0}, std::vector{0.0, 3.0}), 5.0 / 6.0, 1e-12);
    EXPECT_THROW(wasserstein_1d(std::vector<double>{}, std::vector{1.0}), ParameterError);
}

TEST(Wasserstein, ShiftAndDuplication) {
    std::mt19937 rng(2);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a(17), b(17);
        for (auto& v : a) v = g(rng);
        for (auto& v : b) v = g(rng);
        const double t = g(rng);
        auto shifted = a;
        for (auto& v : shifted) v += t;
        EXPECT_NEAR(wasserstein_1d(a, shifted), std::abs(t), 1e-12);
        // Doubling every atom of b leaves its distribution unchanged.
        auto bb = b;
        bb.insert(bb.end(), b.begin(), b.end());
        EXPECT_NEAR(wasserstein_1d(a, bb), wasserstein_1d(a, b), 1e-12);
        EXPECT_NEAR(wasserstein_1d(bb, a), wasserstein_1d(a, b), 1e-12);
    }
}

TEST(Wasserstein, MarginalAveragesColumns) {
    Matrix a(3, 2), b(3, 2);
    a << 0, 0, 1, 10, 2, 20;
    b << 1, 0, 2, 10, 3, 20;
    EXPECT_DOUBLE_EQ(marginal_wasserstein(a, b), 0.5);
    Matrix c(2, 3);
    c.setZero();
    EXPECT_THROW(marginal_wasserstein(a, c), ParameterError);
}
