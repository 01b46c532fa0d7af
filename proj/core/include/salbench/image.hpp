#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace salbench {

/// 8-bit RGB raster, row-major, three interleaved channels per pixel.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h);

  static RgbImage filled(int w, int h, std::array<std::uint8_t, 3> rgb);

  std::uint8_t* at(int row, int col) { return pixels.data() + (static_cast<std::size_t>(row) * width + col) * 3; }
  const std::uint8_t* at(int row, int col) const {
    return pixels.data() + (static_cast<std::size_t>(row) * width + col) * 3;
  }

  bool empty() const noexcept { return width == 0 || height == 0; }
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Decodes any format OpenCV understands into RGB. Throws decode_failure.
RgbImage load_image(const std::filesystem::path& path);

/// Lossless PNG. Throws io_failure.
void write_png(const RgbImage& image, const std::filesystem::path& path);

/// Bilinear resampling with half-pixel centres. A same-size request returns
/// an exact copy. Throws resize_failure on empty input or target size.
RgbImage resize_bilinear(const RgbImage& image, int width, int height);

/// Copies src into dst with its top-left corner at (row, col).
void blit(const RgbImage& src, RgbImage& dst, int row, int col);

}  // namespace salbench
