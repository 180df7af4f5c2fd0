#include "alime/surrogate.hpp"

#include <algorithm>
#include <optional>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "alime/error.hpp"
#include "alime/parallel.hpp"
#include "alime/random.hpp"

namespace alime {

void validate(const ExplainConfig& cfg) {
    if (cfg.n_samples < 2) throw ParameterError("n_samples must be at least 2");
    if (cfg.batch_size < 1) throw ParameterError("batch_size must be at least 1");
    if (!(cfg.kernel.sigma > 0.0)) throw ParameterError("kernel sigma must be positive");
    if (!(cfg.ridge.alpha >= 0.0)) throw ParameterError("ridge alpha must be >= 0");
    validate(cfg.sampler);
    if (cfg.kernel.distance_kind == DistanceKind::msssim) validate(cfg.msssim);
}

std::string config_digest(const ExplainConfig& cfg) {
    return fmt::format("sampler={};distance={};sigma={};seed={};n={}", to_string(cfg.sampler),
                       to_string(cfg.kernel.distance_kind), cfg.kernel.sigma, cfg.seed, cfg.n_samples);
}

ImageExplanation explain_image(const Image& image, BlackBox& blackbox, const ExplainConfig& cfg) {
    validate(cfg);
    auto seg = slic_segment(image, cfg.segments);
    if (seg.n_segments() == 1)
        spdlog::warn("segmentation produced a single superpixel; the explanation has one coefficient");
    return explain_image(image, seg, blackbox, cfg);
}

ImageExplanation explain_image(const Image& image, const SuperpixelSegmentation& seg, BlackBox& blackbox,
                               const ExplainConfig& cfg) {
    validate(cfg);
    if (blackbox.input_kind() != InputKind::image) throw ParameterError("black-box does not accept images");
    const std::size_t n = cfg.n_samples, s = seg.n_segments(), n_classes = blackbox.n_classes();

    ImageExplanation out;
    out.segmentation = seg;
    auto& hood = out.neighbourhood;
    hood.masks = sample_masks(n, s, derive_seed(cfg.seed, {1}));
    hood.distances.assign(n, 0.0);

    const Realizer realizer(image, seg, cfg.sampler);
    const std::uint64_t noise_seed = derive_seed(cfg.seed, {2});
    std::optional<MsssimReference> reference;
    if (cfg.kernel.distance_kind == DistanceKind::msssim) reference.emplace(image, cfg.msssim);

    Matrix probs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_classes));
    std::vector<Image> batch;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
        const std::size_t end = std::min(n, start + cfg.batch_size);
        batch.assign(end - start, Image{});
        parallel_for(end - start, cfg.threads, [&](std::size_t j) {
            const std::size_t i = start + j;
            batch[j] = realizer.realize(hood.masks[i], noise_seed ^ i);
            if (reference) {
                const double sim = reference->similarity(batch[j]);
                hood.distances[i] = cfg.kernel.perceptual_form == PerceptualForm::similarity
                                        ? sim
                                        : std::clamp(1.0 - sim, 0.0, 1.0);
            } else {
                hood.distances[i] = cosine_mask_distance(hood.masks[i]);
            }
        });
        Matrix rows;
        try {
            rows = blackbox.predict_images(batch);
            validate_probabilities(rows, batch.size(), n_classes);
        } catch (const Error& e) {
            throw BlackBoxError(start, e.what());
        }
        probs.middleRows(static_cast<Eigen::Index>(start), rows.rows()) = rows;
    }

    Eigen::Index class_id = 0;
    probs.row(0).maxCoeff(&class_id);

    hood.targets.resize(n);
    hood.weights.resize(n);
    Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s));
    for (std::size_t i = 0; i < n; ++i) {
        hood.targets[i] = probs(static_cast<Eigen::Index>(i), class_id);
        hood.weights[i] = exponential_kernel(hood.distances[i], cfg.kernel.sigma);
        for (std::size_t k = 0; k < s; ++k)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = hood.masks[i][k];
    }

    const auto fit = fit_weighted_ridge(X, hood.targets, hood.weights, cfg.ridge);
    auto& e = out.explanation;
    e.coefficients.assign(fit.coefficients.data(), fit.coefficients.data() + fit.coefficients.size());
    e.intercept = fit.intercept;
    e.class_id = static_cast<int>(class_id);
    e.config_digest = config_digest(cfg);
    return out;
}

Explanation2D explain_point2d(const Vector& query, const Matrix& samples, BlackBox& blackbox, const RidgeConfig& cfg,
                              std::span<const double> weights) {
    if (query.size() != 2 || samples.cols() != 2) throw DimensionError("explain_point2d works on 2-D points");
    if (samples.rows() < 3) throw ParameterError("explain_point2d needs at least 3 samples");
    if (!weights.empty() && weights.size() != static_cast<std::size_t>(samples.rows()))
        throw DimensionError("one weight per sample is required");

    const Matrix q = query.transpose();
    const Matrix q_probs = blackbox.predict_points(q);
    validate_probabilities(q_probs, 1, blackbox.n_classes());
    Eigen::Index class_id = 0;
    q_probs.row(0).maxCoeff(&class_id);

    const Matrix probs = blackbox.predict_points(samples);
    validate_probabilities(probs, static_cast<std::size_t>(samples.rows()), blackbox.n_classes());
    const Vector targets = probs.col(class_id);
    const std::vector<double> uniform(static_cast<std::size_t>(samples.rows()), 1.0);
    const auto fit = fit_weighted_ridge(samples, std::span<const double>(targets.data(), uniform.size()),
                                        weights.empty() ? std::span<const double>(uniform) : weights, cfg);
    return {fit.coefficients, fit.intercept, static_cast<int>(class_id)};
}

double surrogate_param_distance(const Explanation2D& a, const Explanation2D& b) {
    if (a.coefficients.size() != b.coefficients.size()) throw DimensionError("surrogates differ in dimension");
    return (a.coefficients - b.coefficients).norm();
}

}  // namespace alime
