#include "alime/image.hpp"

#include <algorithm>
#include <cmath>

#include "alime/error.hpp"

namespace alime {

Image::Image(std::size_t width, std::size_t height, std::size_t channels, float fill)
    : Image(width, height, channels, std::vector<float>(width * height * channels, fill)) {}

Image::Image(std::size_t width, std::size_t height, std::size_t channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    if (channels != 1 && channels != 3) throw ParameterError("image must have 1 or 3 channels");
    if (data_.size() != width * height * channels)
        throw DimensionError("image data length does not match width*height*channels");
    for (float v : data_)
        if (!(v >= 0.0f && v <= 1.0f)) throw ParameterError("image intensities must lie in [0,1]");
}

std::vector<double> luminance(const Image& image) {
    const auto px = image.data();
    std::vector<double> out(image.pixel_count());
    if (image.channels() == 1) {
        std::copy(px.begin(), px.end(), out.begin());
        return out;
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = 0.299 * px[3 * i] + 0.587 * px[3 * i + 1] + 0.114 * px[3 * i + 2];
    return out;
}

std::vector<double> channel_means(const Image& image) {
    const std::size_t c = image.channels();
    std::vector<double> sums(c, 0.0);
    const auto px = image.data();
    for (std::size_t i = 0; i < px.size(); ++i) sums[i % c] += px[i];
    const double n = static_cast<double>(std::max<std::size_t>(1, image.pixel_count()));
    for (auto& s : sums) s /= n;
    return sums;
}

Image resize_bilinear(const Image& image, std::size_t width, std::size_t height) {
    if (width == 0 || height == 0) throw ParameterError("resize target must be non-empty");
    if (image.empty()) throw ParameterError("cannot resize an empty image");
    if (image.width() == width && image.height() == height) return image;

    const std::size_t c = image.channels();
    Image out(width, height, c);
    const double sx = static_cast<double>(image.width()) / static_cast<double>(width);
    const double sy = static_cast<double>(image.height()) / static_cast<double>(height);
    const auto max_x = static_cast<double>(image.width() - 1);
    const auto max_y = static_cast<double>(image.height() - 1);
    for (std::size_t r = 0; r < height; ++r) {
        const double fy = std::clamp((static_cast<double>(r) + 0.5) * sy - 0.5, 0.0, max_y);
        const auto y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(y0 + 1, image.height() - 1);
        const double ty = fy - static_cast<double>(y0);
        for (std::size_t col = 0; col < width; ++col) {
            const double fx = std::clamp((static_cast<double>(col) + 0.5) * sx - 0.5, 0.0, max_x);
            const auto x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(x0 + 1, image.width() - 1);
            const double tx = fx - static_cast<double>(x0);
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double top = (1 - tx) * image.at(y0, x0, ch) + tx * image.at(y0, x1, ch);
                const double bottom = (1 - tx) * image.at(y1, x0, ch) + tx * image.at(y1, x1, ch);
                out.at(r, col, ch) = clamp_unit((1 - ty) * top + ty * bottom);
            }
        }
    }
    return out;
}

}  // namespace alime
