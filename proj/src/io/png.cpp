#include "tactile/io/png.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "tactile/core/atomic_file.hpp"
#include "tactile/core/error.hpp"

namespace tactile::io {

std::string encode_png(const Image& image) {
    if (image.empty()) throw InputError("cannot encode an empty image");
    std::vector<png_byte> pixels(image.size());
    const auto src = image.data();
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const float v = std::clamp(src[i], 0.0f, 1.0f);
        pixels[i] = static_cast<png_byte>(std::lround(v * 255.0f));
    }
    png_image png;
    std::memset(&png, 0, sizeof png);
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width());
    png.height = static_cast<png_uint_32>(image.height());
    png.format = PNG_FORMAT_RGB;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&png, nullptr, &size, 0, pixels.data(), 0, nullptr))
        throw IoError(std::string("png encode failed: ") + png.message);
    std::string out(size, '\0');
    if (!png_image_write_to_memory(&png, out.data(), &size, 0, pixels.data(), 0, nullptr))
        throw IoError(std::string("png encode failed: ") + png.message);
    out.resize(size);
    return out;
}

Image decode_png(const std::string& bytes) {
    png_image png;
    std::memset(&png, 0, sizeof png);
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
        throw IoError(std::string("png decode failed: ") + png.message);
    png.format = PNG_FORMAT_RGB;
    std::vector<png_byte> pixels(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, pixels.data(), 0, nullptr)) {
        png_image_free(&png);
        throw IoError(std::string("png decode failed: ") + png.message);
    }
    Image image(static_cast<int>(png.height), static_cast<int>(png.width));
    auto dst = image.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<float>(pixels[i]) / 255.0f;
    return image;
}

void write_png(const std::filesystem::path& path, const Image& image, bool overwrite) {
    write_file_atomic(path, encode_png(image), overwrite);
}

Image read_png(const std::filesystem::path& path) {
    try {
        return decode_png(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

}  // namespace tactile::io
