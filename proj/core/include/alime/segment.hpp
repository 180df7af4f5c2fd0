#pragma once

#include <cstdint>
#include <vector>

#include "alime/image.hpp"
#include "alime/types.hpp"

namespace alime {

struct SlicParams {
    std::size_t n_segments = 50;
    double compactness = 10.0;
    std::size_t max_iters = 10;
    std::uint64_t seed = 0;
};

/// SLIC superpixels in CIELAB (L only for gray input) from a regular grid of
/// seeds, followed by connectivity enforcement: every label keeps its largest
/// 4-connected component and stray components merge into the largest adjacent
/// label. Labels are compacted to 0..S-1 in raster order of first appearance,
/// with S <= n_segments.
///
/// The grid initialisation leaves nothing to chance, so `seed` does not change
/// the result; it is accepted for interface symmetry with the samplers.
SuperpixelSegmentation slic_segment(const Image& image, const SlicParams& params);

/// CIELAB (D65) conversion of an sRGB image; gray images map to L only.
/// Returns H*W*3 (or H*W for gray) doubles.
std::vector<double> to_lab(const Image& image);

/// Per-segment mean color: result[s][c].
std::vector<std::vector<double>> segment_stats(const SuperpixelSegmentation& seg, const Image& image);

/// Overlay with segment boundaries painted red, for debugging.
Image draw_boundaries(const Image& image, const SuperpixelSegmentation& seg);

}  // namespace alime
