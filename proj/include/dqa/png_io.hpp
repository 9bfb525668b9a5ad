#pragma once

#include <string>

#include "dqa/image.hpp"

namespace dqa {

/// Decodes an 8-bit PNG into RGB (gray, palette and alpha are converted; alpha dropped).
RasterImage read_png(const std::string& path);
/// Writes an 8-bit gray or RGB PNG with no timestamp chunk, so output bytes are stable.
void write_png(const std::string& path, const RasterImage& img);

}  // namespace dqa
