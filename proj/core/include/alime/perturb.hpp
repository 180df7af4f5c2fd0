#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alime/image.hpp"
#include "alime/types.hpp"

namespace alime {

enum class SamplerKind { zero, mean, noise, blur, contrast };

/// How ablated superpixels are realized. `level` is the noise standard
/// deviation, the blur kernel size, or the contrast factor; zero and mean
/// ignore it.
struct SamplerSpec {
    SamplerKind kind = SamplerKind::mean;
    double level = 0.0;

    friend bool operator==(const SamplerSpec&, const SamplerSpec&) = default;
};

/// Same parameterisation as SamplerSpec, applied to a whole image.
using DistortionSpec = SamplerSpec;

std::string to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(const std::string& name);
/// e.g. "mean", "noise@0.05", "blur@5", "contrast@0.5".
std::string to_string(const SamplerSpec& spec);
SamplerSpec sampler_spec_from_string(const std::string& text);

/// Throws ParameterError unless the level is valid for the kind.
void validate(const SamplerSpec& spec);

/// First mask is all ones; the rest are i.i.d. Bernoulli(0.5) bits.
std::vector<InterpretableMask> sample_masks(std::size_t n_samples, std::size_t n_segments,
                                            std::uint64_t seed);

/// Normalized 1-D Gaussian taps for an odd kernel size, with
/// sigma = 0.3 * ((k - 1) / 2 - 1) + 0.8.
std::vector<double> gaussian_kernel(std::size_t ksize);
double blur_sigma(std::size_t ksize);

/// Separable Gaussian blur with clamp-to-edge borders.
Image gaussian_blur(const Image& image, std::size_t ksize);

/// Caches everything a sampler needs from one source image (segment means,
/// full-image blur, channel means) so that many masks can be realized cheaply.
/// Immutable after construction; realize() may be called concurrently.
class Realizer {
public:
    Realizer(const Image& image, const SuperpixelSegmentation& seg, const SamplerSpec& spec);

    /// Pixels of kept superpixels are copied bit-exactly; the others are
    /// replaced according to the sampler. `seed` only affects the noise sampler.
    Image realize(const InterpretableMask& mask, std::uint64_t seed) const;

    const Image& source() const noexcept { return image_; }
    const SuperpixelSegmentation& segmentation() const noexcept { return seg_; }

private:
    float replacement(std::size_t pixel, std::size_t ch, double noise) const;

    Image image_;
    SuperpixelSegmentation seg_;
    SamplerSpec spec_;
    std::vector<std::vector<double>> seg_means_;
    std::vector<double> channel_means_;
    Image blurred_;
};

Image realize(const Image& image, const SuperpixelSegmentation& seg, const InterpretableMask& mask,
              const SamplerSpec& spec, std::uint64_t seed);

/// Whole-image distortion: realize() with one segment and an all-zeros mask.
Image distort(const Image& image, const DistortionSpec& spec, std::uint64_t seed);

}  // namespace alime
