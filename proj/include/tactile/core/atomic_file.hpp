#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace tactile {

/// Writes `contents` to a temporary sibling of `path` and renames it into
/// place. Refuses to replace an existing file unless `overwrite` is set.
/// Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents, bool overwrite);

/// Whole file as bytes. Throws IoError.
std::string read_file(const std::filesystem::path& path);

}  // namespace tactile
