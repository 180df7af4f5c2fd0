#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace alime {

/// Dense raster with 1 or 3 channels, row-major and channel-interleaved.
/// Intensities are floats in [0, 1].
class Image {
public:
    Image() = default;
    Image(std::size_t width, std::size_t height, std::size_t channels, float fill = 0.0f);
    Image(std::size_t width, std::size_t height, std::size_t channels, std::vector<float> data);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept { return width_ * height_; }
    bool empty() const noexcept { return data_.empty(); }

    float& at(std::size_t row, std::size_t col, std::size_t ch = 0) noexcept {
        return data_[(row * width_ + col) * channels_ + ch];
    }
    float at(std::size_t row, std::size_t col, std::size_t ch = 0) const noexcept {
        return data_[(row * width_ + col) * channels_ + ch];
    }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }

    bool same_shape(const Image& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::size_t channels_ = 0;
    std::vector<float> data_;
};

/// Rec. 601 luma (0.299 R + 0.587 G + 0.114 B) per pixel; gray images pass through.
std::vector<double> luminance(const Image& image);

/// Per-channel mean over the whole image.
std::vector<double> channel_means(const Image& image);

/// Bilinear resize with half-pixel centers; resizing to the same shape is the identity.
Image resize_bilinear(const Image& image, std::size_t width, std::size_t height);

/// Clamp a value to [0, 1].
inline float clamp_unit(double v) noexcept {
    return static_cast<float>(v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v));
}

}  // namespace alime
