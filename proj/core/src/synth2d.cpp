#include "alime/synth2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "alime/error.hpp"
#include "alime/metrics.hpp"
#include "alime/parallel.hpp"
#include "alime/surrogate.hpp"

namespace alime {

LabeledPoints two_moons(std::size_t n, double noise_std, std::uint64_t seed) {
    if (n < 2) throw ParameterError("two_moons needs at least 2 points");
    if (!(noise_std >= 0.0)) throw ParameterError("noise_std must be non-negative");
    const std::size_t n_outer = n / 2, n_inner = n - n_outer;
    LabeledPoints out{Matrix(static_cast<Eigen::Index>(n), 2), std::vector<int>(n)};
    const auto theta = [](std::size_t i, std::size_t count) {
        return count == 1 ? 0.0 : std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1);
    };
    for (std::size_t i = 0; i < n_outer; ++i) {
        const double t = theta(i, n_outer);
        out.points(static_cast<Eigen::Index>(i), 0) = std::cos(t);
        out.points(static_cast<Eigen::Index>(i), 1) = std::sin(t);
        out.labels[i] = 0;
    }
    for (std::size_t i = 0; i < n_inner; ++i) {
        const double t = theta(i, n_inner);
        const auto r = static_cast<Eigen::Index>(n_outer + i);
        out.points(r, 0) = 1.0 - std::cos(t);
        out.points(r, 1) = 0.5 - std::sin(t);
        out.labels[n_outer + i] = 1;
    }
    if (noise_std > 0.0) {
        Rng rng(seed);
        std::normal_distribution<double> gauss(0.0, noise_std);
        for (Eigen::Index i = 0; i < out.points.rows(); ++i) {
            out.points(i, 0) += gauss(rng);
            out.points(i, 1) += gauss(rng);
        }
    }
    return out;
}

Vector draw_moons_point(double noise_std, Rng& rng) {
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    const bool inner = (rng() >> 63) != 0;
    const double t = angle(rng);
    Vector p(2);
    if (inner) {
        p << 1.0 - std::cos(t), 0.5 - std::sin(t);
    } else {
        p << std::cos(t), std::sin(t);
    }
    if (noise_std > 0.0) {
        std::normal_distribution<double> gauss(0.0, noise_std);
        p(0) += gauss(rng);
        p(1) += gauss(rng);
    }
    return p;
}

QuantileTransform::QuantileTransform(std::vector<std::vector<double>> quantiles) : quantiles_(std::move(quantiles)) {
    if (quantiles_.empty()) throw ParameterError("quantile transform needs at least one feature");
    const std::size_t m = quantiles_.front().size();
    if (m < 2) throw ParameterError("quantile transform needs at least 2 quantiles");
    for (const auto& q : quantiles_) {
        if (q.size() != m) throw DimensionError("every feature needs the same number of quantiles");
        if (!std::is_sorted(q.begin(), q.end())) throw ParameterError("quantiles must be non-decreasing");
    }
}

namespace {

double level(std::size_t i, std::size_t m) { return static_cast<double>(i) / static_cast<double>(m - 1); }

/// CDF interpolation through the knots (q_i, i/(m-1)). Averages the
/// right- and left-continuous readings so that runs of tied quantiles map to
/// the middle of their level range.
double cdf(const std::vector<double>& q, double x) {
    const std::size_t m = q.size();
    x = std::clamp(x, q.front(), q.back());
    const auto interp = [&](std::size_t lo) {
        return level(lo, m) + (x - q[lo]) / (q[lo + 1] - q[lo]) * (level(lo + 1, m) - level(lo, m));
    };
    const auto hi = static_cast<std::size_t>(std::upper_bound(q.begin(), q.end(), x) - q.begin());
    const double right = hi == m ? 1.0 : interp(hi - 1);
    const auto k = static_cast<std::size_t>(std::lower_bound(q.begin(), q.end(), x) - q.begin());
    const double left = k == 0 ? 0.0 : interp(k - 1);
    return 0.5 * (right + left);
}

double inverse_cdf(const std::vector<double>& q, double u) {
    const std::size_t m = q.size();
    const auto j = std::min(static_cast<std::size_t>(std::floor(u * static_cast<double>(m - 1))), m - 2);
    const double p0 = level(j, m), p1 = level(j + 1, m);
    return q[j] + (u - p0) / (p1 - p0) * (q[j + 1] - q[j]);
}

}  // namespace

Vector QuantileTransform::forward(const Eigen::Ref<const Vector>& x) const {
    if (static_cast<std::size_t>(x.size()) != quantiles_.size()) throw DimensionError("point dimension mismatch");
    Vector u(x.size());
    for (Eigen::Index f = 0; f < x.size(); ++f) u(f) = cdf(quantiles_[static_cast<std::size_t>(f)], x(f));
    return u;
}

Vector QuantileTransform::inverse(const Eigen::Ref<const Vector>& u) const {
    if (static_cast<std::size_t>(u.size()) != quantiles_.size()) throw DimensionError("point dimension mismatch");
    Vector x(u.size());
    for (Eigen::Index f = 0; f < u.size(); ++f) {
        if (!(u(f) >= 0.0 && u(f) <= 1.0)) throw ParameterError("inverse transform needs u in [0,1]");
        x(f) = inverse_cdf(quantiles_[static_cast<std::size_t>(f)], u(f));
    }
    return x;
}

QuantileTransform fit_quantile_transform(const Matrix& X, std::size_t n_quantiles) {
    if (n_quantiles < 2) throw ParameterError("n_quantiles must be at least 2");
    if (X.rows() < 2) throw ParameterError("quantile transform needs at least 2 rows");
    const auto n = static_cast<std::size_t>(X.rows());
    std::vector<std::vector<double>> q(static_cast<std::size_t>(X.cols()), std::vector<double>(n_quantiles));
    std::vector<double> col(n);
    for (Eigen::Index f = 0; f < X.cols(); ++f) {
        for (std::size_t i = 0; i < n; ++i) col[i] = X(static_cast<Eigen::Index>(i), f);
        std::sort(col.begin(), col.end());
        for (std::size_t i = 0; i < n_quantiles; ++i) {
            const double h = static_cast<double>(n - 1) * level(i, n_quantiles);
            const auto lo = std::min(static_cast<std::size_t>(std::floor(h)), n - 1);
            const double frac = h - static_cast<double>(lo);
            q[static_cast<std::size_t>(f)][i] = lo + 1 < n ? col[lo] + frac * (col[lo + 1] - col[lo]) : col[lo];
        }
    }
    return QuantileTransform(std::move(q));
}

Matrix sample_neighbourhood_2d(const QuantileTransform& qt, const Vector& query, double halfwidth, std::size_t n,
                               std::uint64_t seed) {
    if (!(halfwidth >= 0.0) || !std::isfinite(halfwidth)) throw ParameterError("halfwidth must be non-negative");
    const Vector center = qt.forward(query);
    const auto d = center.size();
    Matrix out(static_cast<Eigen::Index>(n), d);
    Rng rng(seed);
    std::vector<std::uniform_real_distribution<double>> axes;
    for (Eigen::Index f = 0; f < d; ++f)
        axes.emplace_back(std::max(0.0, center(f) - halfwidth), std::min(1.0, center(f) + halfwidth));
    Vector u(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (Eigen::Index f = 0; f < d; ++f) u(f) = std::clamp(axes[static_cast<std::size_t>(f)](rng), 0.0, 1.0);
        out.row(static_cast<Eigen::Index>(i)) = qt.inverse(u).transpose();
    }
    return out;
}

Box2D Box2D::everywhere() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf, -inf, inf};
}

Box2D Box2D::bounding(const Matrix& points) {
    if (points.rows() == 0 || points.cols() != 2) throw ParameterError("bounding box needs a non-empty 2-D point set");
    return {points.col(0).minCoeff(), points.col(0).maxCoeff(), points.col(1).minCoeff(), points.col(1).maxCoeff()};
}

Matrix true_local_samples(double noise_std, const Box2D& box, std::size_t n, std::uint64_t seed, std::size_t max_draws) {
    Matrix out(static_cast<Eigen::Index>(n), 2);
    Rng rng(seed);
    std::size_t accepted = 0;
    for (std::size_t draws = 0; accepted < n; ++draws) {
        if (draws >= max_draws)
            throw EmptyRegionError("only " + std::to_string(accepted) + " of " + std::to_string(n) +
                                   " two-moons draws fell inside the region");
        const Vector p = draw_moons_point(noise_std, rng);
        if (box.contains(p(0), p(1))) out.row(static_cast<Eigen::Index>(accepted++)) = p.transpose();
    }
    return out;
}

void validate(const Synth2DConfig& cfg) {
    if (cfg.n_train < 2) throw ParameterError("n_train must be at least 2");
    if (!(cfg.noise_std >= 0.0)) throw ParameterError("noise_std must be non-negative");
    if (cfg.n_queries < 2) throw ParameterError("n_queries must be at least 2");
    if (!(cfg.halfwidth > 0.0)) throw ParameterError("halfwidth must be positive");
    if (cfg.quantile_grid.empty()) throw ParameterError("quantile_grid must not be empty");
    for (auto m : cfg.quantile_grid)
        if (m < 2) throw ParameterError("quantile counts must be at least 2");
    if (cfg.n_neighbourhood < 3) throw ParameterError("n_neighbourhood must be at least 3");
    if (cfg.n_true_samples < 3) throw ParameterError("n_true_samples must be at least 3");
}

Synth2DResult run_synth_experiment(const Synth2DConfig& cfg) {
    validate(cfg);
    const auto train = two_moons(cfg.n_train, cfg.noise_std, derive_seed(cfg.seed, {1}));
    ForestConfig fcfg = cfg.forest;
    fcfg.seed = derive_seed(cfg.seed, {2});
    fcfg.threads = cfg.threads;
    Forest forest = train_forest(train.points, train.labels, fcfg);
    const auto test = two_moons(cfg.n_queries, cfg.noise_std, derive_seed(cfg.seed, {3}));

    Synth2DResult result;
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < train.points.rows(); ++i) {
        const Vector row = train.points.row(i).transpose();
        correct += forest.predict({row.data(), 2}) == train.labels[static_cast<std::size_t>(i)];
    }
    result.forest_train_accuracy = static_cast<double>(correct) / static_cast<double>(cfg.n_train);

    std::vector<QuantileTransform> transforms;
    for (auto m : cfg.quantile_grid) transforms.push_back(fit_quantile_transform(train.points, m));

    struct Cell {
        bool ok = false;
        double wasserstein = 0.0;
        double param_distance = 0.0;
    };
    const std::size_t n_grid = cfg.quantile_grid.size();
    std::vector<Cell> cells(n_grid * cfg.n_queries);
    parallel_for(cells.size(), cfg.threads, [&](std::size_t idx) {
        const std::size_t g = idx / cfg.n_queries, q = idx % cfg.n_queries;
        const Vector query = test.points.row(static_cast<Eigen::Index>(q)).transpose();
        const Matrix sampled =
            sample_neighbourhood_2d(transforms[g], query, cfg.halfwidth, cfg.n_neighbourhood, derive_seed(cfg.seed, {4, q}));
        Matrix truth;
        try {
            truth = true_local_samples(cfg.noise_std, Box2D::bounding(sampled), cfg.n_true_samples,
                                       derive_seed(cfg.seed, {5, q}));
        } catch (const EmptyRegionError&) {
            return;
        }
        const auto a = explain_point2d(query, sampled, forest, cfg.ridge);
        const auto b = explain_point2d(query, truth, forest, cfg.ridge);
        cells[idx] = {true, marginal_wasserstein(sampled, truth), surrogate_param_distance(a, b)};
    });

    for (std::size_t g = 0; g < n_grid; ++g) {
        Synth2DRow row;
        row.n_quantiles = cfg.quantile_grid[g];
        for (std::size_t q = 0; q < cfg.n_queries; ++q) {
            const auto& c = cells[g * cfg.n_queries + q];
            if (!c.ok) {
                ++result.skipped_queries;
                continue;
            }
            row.mean_wasserstein += c.wasserstein;
            row.mean_param_distance += c.param_distance;
            ++row.n_effective_queries;
        }
        if (row.n_effective_queries > 0) {
            row.mean_wasserstein /= static_cast<double>(row.n_effective_queries);
            row.mean_param_distance /= static_cast<double>(row.n_effective_queries);
        }
        result.rows.push_back(row);
    }
    return result;
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw ParameterError("spearman needs two equal-length series of size >= 2");
    const auto ranks = [](std::span<const double> v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(ra.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

}  // namespace alime
