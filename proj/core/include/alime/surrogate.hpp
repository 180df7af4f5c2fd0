#pragma once

#include <cstdint>
#include <string>

#include "alime/blackbox.hpp"
#include "alime/metrics.hpp"
#include "alime/perturb.hpp"
#include "alime/ridge.hpp"
#include "alime/segment.hpp"
#include "alime/types.hpp"

namespace alime {

struct ExplainConfig {
    std::size_t n_samples = 1000;
    SamplerSpec sampler{SamplerKind::mean, 0.0};
    KernelConfig kernel{};
    RidgeConfig ridge{};
    SlicParams segments{};
    MsssimConfig msssim{};
    std::uint64_t seed = 0;
    std::size_t batch_size = 32;
    /// Workers used to realize the neighbourhood and score distances.
    std::size_t threads = 1;
};

void validate(const ExplainConfig& cfg);

/// Identifier of (sampler, distance, sigma, seed, n_samples).
std::string config_digest(const ExplainConfig& cfg);

struct ImageExplanation {
    Explanation explanation;
    Neighbourhood neighbourhood;
    SuperpixelSegmentation segmentation;
};

/// Segment, sample masks, realize, query the black-box in batches, weight
/// each sample with the exponential kernel and fit a weighted ridge surrogate
/// for the class the black-box ranks highest on the query image.
ImageExplanation explain_image(const Image& image, BlackBox& blackbox, const ExplainConfig& cfg);

/// Same pipeline on a precomputed segmentation.
ImageExplanation explain_image(const Image& image, const SuperpixelSegmentation& seg, BlackBox& blackbox,
                               const ExplainConfig& cfg);

struct Explanation2D {
    Vector coefficients;  // length 2
    double intercept = 0.0;
    int class_id = 0;
};

/// Uniform-weight ridge fit of the probability of the query's predicted class
/// against the raw sample coordinates. `weights`, when non-empty, overrides the
/// uniform weights.
Explanation2D explain_point2d(const Vector& query, const Matrix& samples, BlackBox& blackbox,
                              const RidgeConfig& cfg, std::span<const double> weights = {});

/// Euclidean distance between coefficient vectors (intercepts excluded).
double surrogate_param_distance(const Explanation2D& a, const Explanation2D& b);

}  // namespace alime
