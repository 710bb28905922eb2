#pragma once

#include <filesystem>

#include "based/image.hpp"

namespace based {

/// Decodes an 8-bit PNG. Gray is expanded to three equal channels, alpha is dropped.
/// Throws IoError when the file cannot be read, FormatError for non-PNG data or
/// samples deeper than 8 bits.
RgbImage load_png(const std::filesystem::path& path);

void save_png(const std::filesystem::path& path, const RgbImage& img);

}  // namespace based
