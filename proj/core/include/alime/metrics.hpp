#pragma once

#include <span>
#include <vector>

#include "alime/image.hpp"
#include "alime/types.hpp"

namespace alime {

enum class DistanceKind { cosine_mask, msssim };

/// How a perceptual similarity becomes the kernel distance D.
enum class PerceptualForm {
    one_minus_similarity,  ///< D = 1 - MS-SSIM (zero at the query)
    similarity,            ///< D = MS-SSIM, taken literally
};

struct KernelConfig {
    double sigma = 0.25;
    DistanceKind distance_kind = DistanceKind::cosine_mask;
    PerceptualForm perceptual_form = PerceptualForm::one_minus_similarity;
};

std::string to_string(DistanceKind kind);
DistanceKind distance_kind_from_string(const std::string& name);

/// The canonical five-scale weights (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
/// add up to 1.0001; they are divided by their sum so that they total 1.
std::vector<double> canonical_msssim_weights();

/// Multi-scale SSIM settings; defaults are the canonical five-scale constants.
struct MsssimConfig {
    std::size_t n_scales = 5;
    std::vector<double> scale_weights = canonical_msssim_weights();
    std::size_t window_size = 11;
    double window_sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
    /// Smallest side allowed at the coarsest scale.
    std::size_t min_coarse_side = 3;
};

void validate(const MsssimConfig& cfg);

/// 1 - sqrt(k / S) for k ones out of S bits; an all-zeros mask is at distance 1.
double cosine_mask_distance(const InterpretableMask& mask);

/// exp(-d^2 / sigma^2).
double exponential_kernel(double d, double sigma);

/// MS-SSIM on luminance. Windows larger than a pyramid level shrink to that
/// level's smaller side (sigma scaled in proportion), so images only need
/// min_coarse_side * 2^(n_scales-1) pixels per side.
double msssim(const Image& x, const Image& y, const MsssimConfig& cfg = {});

/// Precomputed reference pyramid for repeated comparisons against one image.
class MsssimReference {
public:
    MsssimReference(const Image& reference, MsssimConfig cfg = {});
    double similarity(const Image& other) const;

private:
    struct Level {
        std::size_t width, height;
        std::vector<double> pixels;
    };
    static std::vector<Level> pyramid(const Image& image, std::size_t n_scales);

    MsssimConfig cfg_;
    std::vector<Level> ref_;
};

/// 1 - msssim(x, y), clamped to [0, 1].
double perceptual_distance(const Image& x, const Image& y, const MsssimConfig& cfg = {});

/// Mean over k of ||A_k - B_k||_F^2.
double explanation_distance(std::span<const RelevanceMap> a, std::span<const RelevanceMap> b);

/// Exact W1 between two empirical distributions (integrated |CDF_a - CDF_b|).
double wasserstein_1d(std::span<const double> a, std::span<const double> b);

/// Mean over columns of wasserstein_1d on each coordinate. Rows are points.
double marginal_wasserstein(const Matrix& a, const Matrix& b);

}  // namespace alime
