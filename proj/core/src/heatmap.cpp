#include <algorithm>
#include <cmath>

#include "alime/error.hpp"
#include "alime/image_io.hpp"
#include "alime/imagexp.hpp"

namespace alime {

Image render_heatmap(const Image& image, const RelevanceMap& map) {
    if (map.width != image.width() || map.height != image.height() || map.values.size() != image.pixel_count())
        throw DimensionError("relevance map and image shapes differ");
    double max_abs = 0.0;
    for (double v : map.values) max_abs = std::max(max_abs, std::abs(v));

    Image out(image.width(), image.height(), 3);
    const std::size_t c = image.channels();
    for (std::size_t p = 0; p < image.pixel_count(); ++p) {
        const double v = map.values[p];
        const double alpha = max_abs > 0.0 ? 0.5 * std::abs(v) / max_abs : 0.0;
        const double tint[3] = {v < 0 ? 1.0 : 0.0, v > 0 ? 1.0 : 0.0, 0.0};
        for (std::size_t ch = 0; ch < 3; ++ch) {
            const float src = image.data()[p * c + (c == 3 ? ch : 0)];
            out.data()[p * 3 + ch] = alpha == 0.0 ? src : clamp_unit((1.0 - alpha) * src + alpha * tint[ch]);
        }
    }
    return out;
}

void render_heatmap(const Image& image, const RelevanceMap& map, const std::filesystem::path& out) {
    write_png(render_heatmap(image, map), out);
}

}  // namespace alime
