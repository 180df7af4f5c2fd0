#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

#include "alime/error.hpp"
#include "alime/image_io.hpp"

using namespace alime;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "alime_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

Image eight_bit_image(std::size_t w, std::size_t h, std::size_t c) {
    std::vector<float> data(w * h * c);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>((i * 37) % 256) / 255.0f;
    return Image(w, h, c, data);
}

}  // namespace

TEST(ImageIo, PngRoundTripRgbAndGray) {
    for (std::size_t c : {1u, 3u}) {
        const Image img = eight_bit_image(13, 7, c);
        const auto path = temp_path("rt" + std::to_string(c) + ".png");
        write_png(img, path);
        const Image back = read_image(path);
        ASSERT_TRUE(back.same_shape(img));
        for (std::size_t i = 0; i < img.data().size(); ++i) EXPECT_FLOAT_EQ(back.data()[i], img.data()[i]);
    }
}

TEST(ImageIo, PnmRoundTrip) {
    for (std::size_t c : {1u, 3u}) {
        const Image img = eight_bit_image(5, 9, c);
        const auto path = temp_path("rt" + std::to_string(c) + ".pnm");
        write_pnm(img, path);
        const Image back = read_image(path);
        ASSERT_TRUE(back.same_shape(img));
        for (std::size_t i = 0; i < img.data().size(); ++i) EXPECT_FLOAT_EQ(back.data()[i], img.data()[i]);
    }
}

TEST(ImageIo, Pgm16WritesBigEndianSamples) {
    const std::vector<int> values{0, 1, 300, 65535};
    const auto path = temp_path("labels.pgm");
    write_pgm16(values, 2, 2, 65535, path);
    std::ifstream f(path, std::ios::binary);
    const std::string bytes{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    const std::string header = "P5\n2 2\n65535\n";
    ASSERT_EQ(bytes.substr(0, header.size()), header);
    const std::string body = bytes.substr(header.size());
    ASSERT_EQ(body.size(), 8u);
    EXPECT_EQ(static_cast<unsigned char>(body[4]), 300 >> 8);
    EXPECT_EQ(static_cast<unsigned char>(body[5]), 300 & 0xff);
}

TEST(ImageIo, MissingOrGarbageFilesAreIoErrors) {
    EXPECT_THROW(read_image(temp_path("does_not_exist.png")), IoError);
    const auto path = temp_path("garbage.png");
    std::ofstream(path) << "not an image";
    EXPECT_THROW(read_image(path), IoError);
}
