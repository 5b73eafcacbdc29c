#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace egostereo::io {

// Interleaved 8-bit RGB.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  std::uint8_t* px(int x, int y) { return rgb.data() + 3 * (y * width + x); }
  const std::uint8_t* px(int x, int y) const {
    return rgb.data() + 3 * (y * width + x);
  }
  static Image filled(int w, int h, std::uint8_t r, std::uint8_t g,
                      std::uint8_t b);
};

using Gray16 = Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>;

// All loaders throw DataError on missing files or malformed PNG data.
Image load_png_rgb(const std::string& path);
void save_png_rgb(const std::string& path, const Image& img);

// 16-bit single-channel, used for depth maps (1 unit = 1 mm).
Gray16 load_png_gray16(const std::string& path);
void save_png_gray16(const std::string& path, const Gray16& img);

}  // namespace egostereo::io
