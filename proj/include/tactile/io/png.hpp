#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tactile/core/image.hpp"

namespace tactile::io {

/// 8-bit RGB encoding; each intensity is clamped to [0,1] and stored as
/// round(v * 255), so a round trip is off by at most 1/510.
std::string encode_png(const Image& image);
Image decode_png(const std::string& bytes);

void write_png(const std::filesystem::path& path, const Image& image, bool overwrite);
Image read_png(const std::filesystem::path& path);

}  // namespace tactile::io
