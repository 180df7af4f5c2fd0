#pragma once

#include <cstdint>
#include <vector>

#include "alime/forest.hpp"
#include "alime/random.hpp"
#include "alime/ridge.hpp"
#include "alime/types.hpp"

namespace alime {

struct LabeledPoints {
    Matrix points;  // n x 2
    std::vector<int> labels;
};

/// Two interleaving half circles. Moon 0 holds floor(n/2) points
/// (cos t, sin t) and moon 1 the rest (1 - cos t, 0.5 - sin t), with t on an
/// evenly spaced grid over [0, pi]; Gaussian noise is then added per coordinate.
LabeledPoints two_moons(std::size_t n, double noise_std, std::uint64_t seed);

/// One i.i.d. draw from the two-moons distribution (fair moon choice, uniform t).
Vector draw_moons_point(double noise_std, Rng& rng);

/// Per-feature empirical quantiles at levels i/(m-1).
class QuantileTransform {
public:
    QuantileTransform() = default;
    explicit QuantileTransform(std::vector<std::vector<double>> quantiles);

    std::size_t n_quantiles() const noexcept { return quantiles_.empty() ? 0 : quantiles_.front().size(); }
    std::size_t n_features() const noexcept { return quantiles_.size(); }
    const std::vector<double>& quantiles(std::size_t feature) const { return quantiles_.at(feature); }

    /// Piecewise-linear empirical CDF; x is clipped to the outer quantiles.
    Vector forward(const Eigen::Ref<const Vector>& x) const;
    /// Piecewise-linear inverse; u must lie in [0,1]^d.
    Vector inverse(const Eigen::Ref<const Vector>& u) const;

private:
    std::vector<std::vector<double>> quantiles_;
};

/// Linear-interpolation empirical quantiles (the "type 7" definition).
QuantileTransform fit_quantile_transform(const Matrix& X, std::size_t n_quantiles);

/// Uniform draws in the box forward(query) +- halfwidth, clipped to [0,1]^2,
/// mapped back through the inverse transform.
Matrix sample_neighbourhood_2d(const QuantileTransform& qt, const Vector& query, double halfwidth,
                               std::size_t n, std::uint64_t seed);

struct Box2D {
    double x_min, x_max, y_min, y_max;
    bool contains(double x, double y) const noexcept {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
    static Box2D everywhere();
    static Box2D bounding(const Matrix& points);
};

/// Rejection-samples two-moons draws inside `box` until n are accepted.
/// Throws EmptyRegionError once `max_draws` draws have been spent.
Matrix true_local_samples(double noise_std, const Box2D& box, std::size_t n, std::uint64_t seed,
                          std::size_t max_draws = 10'000'000);

struct Synth2DConfig {
    std::size_t n_train = 2000;
    double noise_std = 0.35;
    std::size_t n_queries = 50;
    double halfwidth = 0.2;
    std::vector<std::size_t> quantile_grid{2, 5, 10, 20, 50, 100};
    std::size_t n_neighbourhood = 500;
    /// Size of the reference sample drawn from the true distribution per query.
    std::size_t n_true_samples = 5000;
    std::uint64_t seed = 0;
    ForestConfig forest{};
    RidgeConfig ridge{};
    std::size_t threads = 1;
};

void validate(const Synth2DConfig& cfg);

struct Synth2DRow {
    std::size_t n_quantiles = 0;
    double mean_wasserstein = 0.0;
    double mean_param_distance = 0.0;
    std::size_t n_effective_queries = 0;
};

struct Synth2DResult {
    std::vector<Synth2DRow> rows;
    std::size_t skipped_queries = 0;
    double forest_train_accuracy = 0.0;
};

Synth2DResult run_synth_experiment(const Synth2DConfig& cfg);

/// Rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace alime
