// Writes the bundled textured test images: alime_make_images <dir> [count] [size]
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "alime/image_io.hpp"
#include "alime/imagexp.hpp"

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: alime_make_images <dir> [count] [size]\n";
        return 1;
    }
    const std::filesystem::path dir = argv[1];
    const std::size_t count = argc > 2 ? std::stoul(argv[2]) : 6;
    const std::size_t size = argc > 3 ? std::stoul(argv[3]) : 64;
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < count; ++i) {
        char name[48];
        std::snprintf(name, sizeof name, "texture_%02zu.png", i);
        alime::write_png(alime::textured_image(size, i), dir / name);
    }
    return 0;
}
