#include "alime/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alime/error.hpp"

namespace alime {

std::string to_string(DistanceKind kind) {
    return kind == DistanceKind::cosine_mask ? "cosine_mask" : "msssim";
}

DistanceKind distance_kind_from_string(const std::string& name) {
    if (name == "cosine_mask" || name == "cosine") return DistanceKind::cosine_mask;
    if (name == "msssim" || name == "ms-ssim") return DistanceKind::msssim;
    throw ParameterError("unknown distance kind '" + name + "'");
}

double cosine_mask_distance(const InterpretableMask& mask) {
    if (mask.empty()) throw ParameterError("mask must have at least one bit");
    const auto ones = static_cast<double>(std::count_if(mask.begin(), mask.end(), [](auto b) { return b != 0; }));
    if (ones == 0.0) return 1.0;
    return 1.0 - std::sqrt(ones / static_cast<double>(mask.size()));
}

double exponential_kernel(double d, double sigma) {
    if (!(sigma > 0.0)) throw ParameterError("kernel width must be positive");
    return std::exp(-(d * d) / (sigma * sigma));
}

std::vector<double> canonical_msssim_weights() {
    std::vector<double> w{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) v /= sum;
    return w;
}

void validate(const MsssimConfig& cfg) {
    if (cfg.n_scales < 1) throw ParameterError("MS-SSIM needs at least one scale");
    if (cfg.scale_weights.size() != cfg.n_scales) throw ParameterError("MS-SSIM needs one weight per scale");
    const double sum = std::accumulate(cfg.scale_weights.begin(), cfg.scale_weights.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9) throw ParameterError("MS-SSIM scale weights must sum to 1");
    if (cfg.window_size < 1 || cfg.window_size % 2 == 0) throw ParameterError("MS-SSIM window size must be odd");
    if (!(cfg.window_sigma > 0.0)) throw ParameterError("MS-SSIM window sigma must be positive");
    if (!(cfg.k1 > 0.0) || !(cfg.k2 > 0.0) || !(cfg.dynamic_range > 0.0))
        throw ParameterError("MS-SSIM stabilizers and dynamic range must be positive");
    if (cfg.min_coarse_side < 1) throw ParameterError("MS-SSIM coarse side must be positive");
}

namespace {

struct Plane {
    std::size_t width = 0, height = 0;
    std::vector<double> v;
};

Plane downsample(const Plane& in) {
    Plane out{in.width / 2, in.height / 2, {}};
    out.v.resize(out.width * out.height);
    for (std::size_t r = 0; r < out.height; ++r)
        for (std::size_t c = 0; c < out.width; ++c) {
            const std::size_t p = 2 * r * in.width + 2 * c;
            out.v[r * out.width + c] = 0.25 * (in.v[p] + in.v[p + 1] + in.v[p + in.width] + in.v[p + in.width + 1]);
        }
    return out;
}

std::vector<double> window_taps(std::size_t size, double sigma) {
    std::vector<double> taps(size);
    const double mid = (static_cast<double>(size) - 1.0) / 2.0;
    for (std::size_t i = 0; i < size; ++i) {
        const double d = static_cast<double>(i) - mid;
        taps[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    }
    const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
    for (auto& t : taps) t /= sum;
    return taps;
}

/// Separable "valid" filtering of several planes at once.
std::vector<std::vector<double>> filter_valid(const std::vector<const std::vector<double>*>& planes, std::size_t w,
                                              std::size_t h, const std::vector<double>& taps) {
    const std::size_t k = taps.size(), ow = w - k + 1, oh = h - k + 1;
    std::vector<std::vector<double>> out;
    std::vector<double> tmp(h * ow);
    for (const auto* plane : planes) {
        const auto& src = *plane;
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < ow; ++c) {
                double acc = 0.0;
                for (std::size_t t = 0; t < k; ++t) acc += taps[t] * src[r * w + c + t];
                tmp[r * ow + c] = acc;
            }
        std::vector<double> res(oh * ow);
        for (std::size_t r = 0; r < oh; ++r)
            for (std::size_t c = 0; c < ow; ++c) {
                double acc = 0.0;
                for (std::size_t t = 0; t < k; ++t) acc += taps[t] * tmp[(r + t) * ow + c];
                res[r * ow + c] = acc;
            }
        out.push_back(std::move(res));
    }
    return out;
}

struct ScaleTerms {
    double cs;    // mean contrast-structure
    double ssim;  // mean luminance * contrast-structure
};

ScaleTerms compare_scale(const std::vector<double>& x, const std::vector<double>& y, std::size_t w, std::size_t h,
                         const MsssimConfig& cfg) {
    const std::size_t ws = std::min({cfg.window_size, w, h});
    const double sigma = cfg.window_sigma * static_cast<double>(ws) / static_cast<double>(cfg.window_size);
    const auto taps = window_taps(ws, sigma);

    std::vector<double> xx(x.size()), yy(y.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto f = filter_valid({&x, &y, &xx, &yy, &xy}, w, h, taps);
    const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
    const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);
    const std::size_t n = f[0].size();
    double cs_sum = 0.0, ssim_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double mx = f[0][i], my = f[1][i];
        const double vx = f[2][i] - mx * mx;
        const double vy = f[3][i] - my * my;
        const double cov = f[4][i] - mx * my;
        const double cs = (2.0 * cov + c2) / (vx + vy + c2);
        const double lum = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
        cs_sum += cs;
        ssim_sum += lum * cs;
    }
    return {cs_sum / static_cast<double>(n), ssim_sum / static_cast<double>(n)};
}

void check_pyramid_size(std::size_t w, std::size_t h, const MsssimConfig& cfg) {
    const std::size_t factor = std::size_t{1} << (cfg.n_scales - 1);
    if (std::min(w, h) < cfg.min_coarse_side * factor)
        throw ParameterError("image of " + std::to_string(w) + "x" + std::to_string(h) + " is too small for " +
                             std::to_string(cfg.n_scales) + " MS-SSIM scales");
}

}  // namespace

std::vector<MsssimReference::Level> MsssimReference::pyramid(const Image& image, std::size_t n_scales) {
    std::vector<Level> levels;
    Plane p{image.width(), image.height(), luminance(image)};
    for (std::size_t s = 0; s < n_scales; ++s) {
        if (s > 0) p = downsample(p);
        levels.push_back({p.width, p.height, p.v});
    }
    return levels;
}

MsssimReference::MsssimReference(const Image& reference, MsssimConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    check_pyramid_size(reference.width(), reference.height(), cfg_);
    ref_ = pyramid(reference, cfg_.n_scales);
}

double MsssimReference::similarity(const Image& other) const {
    if (other.width() != ref_.front().width || other.height() != ref_.front().height)
        throw ParameterError("MS-SSIM inputs must have equal dimensions");
    const auto levels = pyramid(other, cfg_.n_scales);
    double result = 1.0;
    for (std::size_t s = 0; s < cfg_.n_scales; ++s) {
        const auto terms = compare_scale(ref_[s].pixels, levels[s].pixels, levels[s].width, levels[s].height, cfg_);
        const double term = s + 1 == cfg_.n_scales ? terms.ssim : terms.cs;
        result *= std::pow(std::max(term, 0.0), cfg_.scale_weights[s]);
    }
    return result;
}

double msssim(const Image& x, const Image& y, const MsssimConfig& cfg) {
    if (x.width() != y.width() || x.height() != y.height())
        throw ParameterError("MS-SSIM inputs must have equal dimensions");
    return MsssimReference(x, cfg).similarity(y);
}

double perceptual_distance(const Image& x, const Image& y, const MsssimConfig& cfg) {
    return std::clamp(1.0 - msssim(x, y, cfg), 0.0, 1.0);
}

double explanation_distance(std::span<const RelevanceMap> a, std::span<const RelevanceMap> b) {
    if (a.empty() || a.size() != b.size()) throw DimensionError("explanation lists must be non-empty and equal length");
    double total = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].width != b[k].width || a[k].height != b[k].height || a[k].values.size() != b[k].values.size())
            throw DimensionError("relevance maps differ in shape");
        double sq = 0.0;
        for (std::size_t i = 0; i < a[k].values.size(); ++i) {
            const double d = a[k].values[i] - b[k].values[i];
            sq += d * d;
        }
        total += sq;
    }
    return total / static_cast<double>(a.size());
}

double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ParameterError("Wasserstein distance needs non-empty samples");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa.size() == sb.size()) {
        double sum = 0.0;
        for (std::size_t i = 0; i < sa.size(); ++i) sum += std::abs(sa[i] - sb[i]);
        return sum / static_cast<double>(sa.size());
    }
    // Integrate |F_a - F_b| between consecutive support points.
    std::vector<double> all;
    all.reserve(sa.size() + sb.size());
    std::merge(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(all));
    const auto na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
    std::size_t ia = 0, ib = 0;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < all.size(); ++k) {
        while (ia < sa.size() && sa[ia] <= all[k]) ++ia;
        while (ib < sb.size() && sb[ib] <= all[k]) ++ib;
        total += std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb) * (all[k + 1] - all[k]);
    }
    return total;
}

double marginal_wasserstein(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols() || a.cols() == 0) throw ParameterError("point sets must share a positive dimension");
    double total = 0.0;
    for (Eigen::Index d = 0; d < a.cols(); ++d) {
        const Vector ca = a.col(d), cb = b.col(d);
        total += wasserstein_1d(std::span<const double>(ca.data(), static_cast<std::size_t>(ca.size())),
                                std::span<const double>(cb.data(), static_cast<std::size_t>(cb.size())));
    }
    return total / static_cast<double>(a.cols());
}

}  // namespace alime
