#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mvap {

// 8-bit RGB image, row-major, interleaved channels.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // size = 3 * width * height

  std::uint8_t* pixel(int x, int y) {
    return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  const std::uint8_t* pixel(int x, int y) const {
    return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
};

// Binary PPM (P6, maxval 255).
void write_ppm(const Image& img, const std::string& path);
Image read_ppm(const std::string& path);

}  // namespace mvap
