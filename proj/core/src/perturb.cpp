#include "alime/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "alime/error.hpp"
#include "alime/random.hpp"
#include "alime/segment.hpp"

namespace alime {

std::string to_string(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::zero: return "zero";
        case SamplerKind::mean: return "mean";
        case SamplerKind::noise: return "noise";
        case SamplerKind::blur: return "blur";
        case SamplerKind::contrast: return "contrast";
    }
    return "?";
}

SamplerKind sampler_kind_from_string(const std::string& name) {
    if (name == "zero") return SamplerKind::zero;
    if (name == "mean") return SamplerKind::mean;
    if (name == "noise") return SamplerKind::noise;
    if (name == "blur") return SamplerKind::blur;
    if (name == "contrast") return SamplerKind::contrast;
    throw ParameterError("unknown sampler kind '" + name + "'");
}

std::string to_string(const SamplerSpec& spec) {
    if (spec.kind == SamplerKind::zero || spec.kind == SamplerKind::mean) return to_string(spec.kind);
    return fmt::format("{}@{}", to_string(spec.kind), spec.level);
}

SamplerSpec sampler_spec_from_string(const std::string& text) {
    const auto at = text.find('@');
    SamplerSpec spec{sampler_kind_from_string(text.substr(0, at)), 0.0};
    if (at != std::string::npos) {
        try {
            std::size_t used = 0;
            spec.level = std::stod(text.substr(at + 1), &used);
            if (used != text.size() - at - 1) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ParameterError("bad sampler level in '" + text + "'");
        }
    }
    validate(spec);
    return spec;
}

void validate(const SamplerSpec& spec) {
    switch (spec.kind) {
        case SamplerKind::zero:
        case SamplerKind::mean:
            return;
        case SamplerKind::noise:
            if (!(spec.level > 0.0) || !std::isfinite(spec.level))
                throw ParameterError("noise standard deviation must be positive");
            return;
        case SamplerKind::blur:
            if (!(spec.level >= 3.0) || spec.level != std::floor(spec.level) ||
                static_cast<long long>(spec.level) % 2 == 0 || spec.level > 1e6)
                throw ParameterError("blur kernel size must be an odd integer >= 3");
            return;
        case SamplerKind::contrast:
            if (!(spec.level >= 0.0 && spec.level <= 1.0)) throw ParameterError("contrast factor must lie in [0,1]");
            return;
    }
}

std::vector<InterpretableMask> sample_masks(std::size_t n_samples, std::size_t n_segments, std::uint64_t seed) {
    if (n_samples < 1) throw ParameterError("n_samples must be at least 1");
    if (n_segments == 0) throw ParameterError("n_segments must be positive");
    std::vector<InterpretableMask> masks;
    masks.reserve(n_samples);
    masks.emplace_back(n_segments, std::uint8_t{1});
    Rng rng(seed);
    for (std::size_t i = 1; i < n_samples; ++i) {
        InterpretableMask m(n_segments);
        for (auto& bit : m) bit = static_cast<std::uint8_t>(rng() >> 63);
        masks.push_back(std::move(m));
    }
    return masks;
}

double blur_sigma(std::size_t ksize) {
    return 0.3 * ((static_cast<double>(ksize) - 1.0) / 2.0 - 1.0) + 0.8;
}

std::vector<double> gaussian_kernel(std::size_t ksize) {
    if (ksize < 3 || ksize % 2 == 0) throw ParameterError("blur kernel size must be an odd integer >= 3");
    const double sigma = blur_sigma(ksize);
    const auto half = static_cast<long>(ksize / 2);
    std::vector<double> k(ksize);
    double sum = 0.0;
    for (long i = -half; i <= half; ++i) {
        const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + half)] = v;
        sum += v;
    }
    for (auto& v : k) v /= sum;
    return k;
}

Image gaussian_blur(const Image& image, std::size_t ksize) {
    const auto kernel = gaussian_kernel(ksize);
    const auto half = static_cast<long>(ksize / 2);
    const std::size_t w = image.width(), h = image.height(), c = image.channels();
    if (image.empty()) return image;
    const auto clampi = [](long v, std::size_t n) {
        return static_cast<std::size_t>(std::clamp<long>(v, 0, static_cast<long>(n) - 1));
    };

    std::vector<double> tmp(w * h * c);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (long k = -half; k <= half; ++k)
                    acc += kernel[static_cast<std::size_t>(k + half)] *
                           image.at(r, clampi(static_cast<long>(x) + k, w), ch);
                tmp[(r * w + x) * c + ch] = acc;
            }
    Image out(w, h, c);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (long k = -half; k <= half; ++k)
                    acc += kernel[static_cast<std::size_t>(k + half)] *
                           tmp[(clampi(static_cast<long>(r) + k, h) * w + x) * c + ch];
                out.at(r, x, ch) = clamp_unit(acc);
            }
    return out;
}

Realizer::Realizer(const Image& image, const SuperpixelSegmentation& seg, const SamplerSpec& spec)
    : image_(image), seg_(seg), spec_(spec) {
    validate(spec);
    if (seg.width() != image.width() || seg.height() != image.height())
        throw DimensionError("segmentation and image shapes differ");
    switch (spec.kind) {
        case SamplerKind::mean: seg_means_ = segment_stats(seg, image); break;
        case SamplerKind::contrast: channel_means_ = channel_means(image); break;
        case SamplerKind::blur: blurred_ = gaussian_blur(image, static_cast<std::size_t>(spec.level)); break;
        default: break;
    }
}

float Realizer::replacement(std::size_t pixel, std::size_t ch, double noise) const {
    const std::size_t idx = pixel * image_.channels() + ch;
    const double v = image_.data()[idx];
    switch (spec_.kind) {
        case SamplerKind::zero: return 0.0f;
        case SamplerKind::mean:
            return static_cast<float>(seg_means_[static_cast<std::size_t>(seg_.labels()[pixel])][ch]);
        case SamplerKind::noise: return clamp_unit(v + noise);
        case SamplerKind::blur: return blurred_.data()[idx];
        case SamplerKind::contrast:
            // mean + level * (v - mean), written so that level 1 returns v exactly
            return clamp_unit(v + (spec_.level - 1.0) * (v - channel_means_[ch]));
    }
    return static_cast<float>(v);
}

Image Realizer::realize(const InterpretableMask& mask, std::uint64_t seed) const {
    if (mask.size() != seg_.n_segments())
        throw DimensionError("mask length " + std::to_string(mask.size()) + " does not match " +
                             std::to_string(seg_.n_segments()) + " superpixels");
    Image out = image_;
    auto dst = out.data();
    const auto labels = seg_.labels();
    const std::size_t c = image_.channels();

    if (spec_.kind == SamplerKind::noise) {
        Rng rng(seed);
        std::normal_distribution<double> gauss(0.0, spec_.level);
        for (std::size_t p = 0; p < labels.size(); ++p) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double noise = gauss(rng);
                if (!mask[static_cast<std::size_t>(labels[p])]) dst[p * c + ch] = replacement(p, ch, noise);
            }
        }
        return out;
    }
    for (std::size_t p = 0; p < labels.size(); ++p) {
        if (mask[static_cast<std::size_t>(labels[p])]) continue;
        for (std::size_t ch = 0; ch < c; ++ch) dst[p * c + ch] = replacement(p, ch, 0.0);
    }
    return out;
}

Image realize(const Image& image, const SuperpixelSegmentation& seg, const InterpretableMask& mask,
              const SamplerSpec& spec, std::uint64_t seed) {
    return Realizer(image, seg, spec).realize(mask, seed);
}

Image distort(const Image& image, const DistortionSpec& spec, std::uint64_t seed) {
    if (image.empty()) throw ParameterError("cannot distort an empty image");
    const SuperpixelSegmentation whole(image.width(), image.height(), std::vector<int>(image.pixel_count(), 0));
    return Realizer(image, whole, spec).realize(InterpretableMask{0}, seed);
}

}  // namespace alime
