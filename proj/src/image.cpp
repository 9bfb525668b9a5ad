#include "dqa/image.hpp"

#include <algorithm>
#include <string>

#include "dqa/error.hpp"

namespace dqa {

RasterImage::RasterImage(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 1 || height < 1 || (channels != 1 && channels != 3)) {
    throw Error(Errc::invalid_argument, "raster dimensions " + std::to_string(width) + "x" +
                                            std::to_string(height) + "x" + std::to_string(channels));
  }
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width < 1 || height < 1 || (channels != 1 && channels != 3)) {
    throw Error(Errc::invalid_argument, "raster dimensions");
  }
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error(Errc::dimension_mismatch, "raster data length does not match width*height*channels");
  }
}

Rgb RasterImage::rgb(int x, int y) const {
  if (channels_ == 1) {
    const auto v = at(x, y);
    return {v, v, v};
  }
  return {at(x, y, 0), at(x, y, 1), at(x, y, 2)};
}

void RasterImage::set_rgb(int x, int y, Rgb value) {
  if (channels_ == 1) {
    at(x, y) = static_cast<std::uint8_t>((value.r + value.g + value.b) / 3);
    return;
  }
  at(x, y, 0) = value.r;
  at(x, y, 1) = value.g;
  at(x, y, 2) = value.b;
}

std::size_t count_foreground(const BinaryMask& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.data().begin(), mask.data().end(), [](std::uint8_t b) { return b != 0; }));
}

}  // namespace dqa
