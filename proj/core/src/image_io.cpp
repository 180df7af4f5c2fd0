#include "alime/image_io.hpp"

#include <png.h>

#include <array>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "alime/error.hpp"

namespace alime {
namespace {

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Image read_png(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
        throw IoError(path.string() + ": " + png.message);
    const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<unsigned char> raw(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, raw.data(), 0, nullptr)) {
        png_image_free(&png);
        throw IoError(path.string() + ": " + png.message);
    }
    std::vector<float> data(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) data[i] = static_cast<float>(raw[i]) / 255.0f;
    return Image(png.width, png.height, color ? 3 : 1, std::move(data));
}

class PnmReader {
public:
    explicit PnmReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

    std::size_t next_int() {
        skip_space_and_comments();
        std::size_t v = 0;
        bool any = false;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_++] - '0');
            any = true;
        }
        if (!any) throw IoError("malformed PNM header");
        return v;
    }
    std::size_t pos() const noexcept { return pos_; }
    void advance() { ++pos_; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<unsigned char>& bytes_;
    std::size_t pos_ = 2;
};

Image read_pnm(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
    const std::size_t channels = bytes[1] == '6' ? 3 : 1;
    PnmReader reader(bytes);
    const std::size_t w = reader.next_int();
    const std::size_t h = reader.next_int();
    const std::size_t maxval = reader.next_int();
    if (maxval == 0 || maxval > 65535) throw IoError(path.string() + ": bad PNM maxval");
    reader.advance();  // single whitespace byte before the raster
    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    const std::size_t n = w * h * channels;
    if (bytes.size() < reader.pos() + n * bytes_per) throw IoError(path.string() + ": truncated PNM raster");
    std::vector<float> data(n);
    const unsigned char* p = bytes.data() + reader.pos();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t v = bytes_per == 2 ? (std::size_t{p[2 * i]} << 8) | p[2 * i + 1] : p[i];
        data[i] = static_cast<float>(static_cast<double>(std::min(v, maxval)) / static_cast<double>(maxval));
    }
    return Image(w, h, channels, std::move(data));
}

std::vector<unsigned char> to_bytes(const Image& image) {
    std::vector<unsigned char> out(image.data().size());
    const auto px = image.data();
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<unsigned char>(std::lround(static_cast<double>(clamp_unit(px[i])) * 255.0));
    return out;
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    static constexpr std::array<unsigned char, 8> png_sig{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), png_sig.data(), 8) == 0) return read_png(bytes, path);
    if (bytes.size() >= 3 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) return read_pnm(bytes, path);
    throw IoError(path.string() + ": unsupported image format");
}

void write_png(const Image& image, const std::filesystem::path& path) {
    if (image.empty()) throw ParameterError("cannot write an empty image");
    auto raw = to_bytes(image);
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width());
    png.height = static_cast<png_uint_32>(image.height());
    png.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, path.c_str(), 0, raw.data(), 0, nullptr))
        throw IoError(path.string() + ": " + png.message);
}

void write_pnm(const Image& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << (image.channels() == 3 ? "P6" : "P5") << '\n' << image.width() << ' ' << image.height() << "\n255\n";
    const auto raw = to_bytes(image);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

void write_pgm16(std::span<const int> values, std::size_t width, std::size_t height, int maxval,
                 const std::filesystem::path& path) {
    if (values.size() != width * height) throw DimensionError("PGM raster size mismatch");
    if (maxval < 1 || maxval > 65535) throw ParameterError("PGM maxval must be in [1, 65535]");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << width << ' ' << height << '\n' << maxval << '\n';
    std::vector<unsigned char> raw;
    raw.reserve(values.size() * 2);
    for (int v : values) {
        if (v < 0 || v > maxval) throw ParameterError("PGM value out of range");
        if (maxval > 255) raw.push_back(static_cast<unsigned char>(v >> 8));
        raw.push_back(static_cast<unsigned char>(v & 0xff));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace alime
