#pragma once

#include <filesystem>

#include "alime/image.hpp"

namespace alime {

/// Reads 8-bit PNG (gray or RGB; alpha dropped, 16-bit reduced) or binary PGM/PPM.
/// The format is chosen from the file signature.
Image read_image(const std::filesystem::path& path);

void write_png(const Image& image, const std::filesystem::path& path);

/// Binary P5/P6 with maxval 255.
void write_pnm(const Image& image, const std::filesystem::path& path);

/// Binary P5 with arbitrary maxval (<= 65535); values are written big-endian
/// when maxval > 255.
void write_pgm16(std::span<const int> values, std::size_t width, std::size_t height,
                 int maxval, const std::filesystem::path& path);

}  // namespace alime
