#include "egostereo/io/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

#include "egostereo/errors.hpp"

namespace egostereo::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// RAII for the png structs so the setjmp error path cannot leak them.
struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  PngReader() {
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                 nullptr);
    if (png) info = png_create_info_struct(png);
    if (!png || !info) throw DataError("png: out of memory");
  }
  ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  PngWriter() {
    png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                  nullptr);
    if (png) info = png_create_info_struct(png);
    if (!png || !info) throw DataError("png: out of memory");
  }
  ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

}  // namespace

Image Image::filled(int w, int h, std::uint8_t r, std::uint8_t g,
                    std::uint8_t b) {
  Image img;
  img.width = w;
  img.height = h;
  img.rgb.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
    img.rgb[i] = r;
    img.rgb[i + 1] = g;
    img.rgb[i + 2] = b;
  }
  return img;
}

Image load_png_rgb(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw DataError("png: cannot open " + path);
  PngReader p;
  Image img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(p.png))) {
    throw DataError("png: failed to decode " + path);
  }
  png_init_io(p.png, f.get());
  png_read_info(p.png, p.info);

  png_set_expand(p.png);    // palettes / low bit depths -> 8-bit
  png_set_strip_16(p.png);  // 16-bit -> 8-bit
  png_set_strip_alpha(p.png);
  png_set_gray_to_rgb(p.png);
  png_read_update_info(p.png, p.info);

  if (png_get_channels(p.png, p.info) != 3 ||
      png_get_bit_depth(p.png, p.info) != 8) {
    throw DataError("png: " + path + " did not normalize to RGB8");
  }
  img.width = static_cast<int>(png_get_image_width(p.png, p.info));
  img.height = static_cast<int>(png_get_image_height(p.png, p.info));
  img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  rows.resize(img.height);
  for (int y = 0; y < img.height; ++y) {
    rows[y] = img.rgb.data() + static_cast<std::size_t>(y) * img.width * 3;
  }
  png_read_image(p.png, rows.data());
  png_read_end(p.png, nullptr);
  return img;
}

void save_png_rgb(const std::string& path, const Image& img) {
  if (img.width <= 0 || img.height <= 0 ||
      img.rgb.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
    throw DataError("png: refusing to write malformed image " + path);
  }
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw DataError("png: cannot write " + path);
  PngWriter p;
  if (setjmp(png_jmpbuf(p.png))) {
    throw DataError("png: failed to encode " + path);
  }
  png_init_io(p.png, f.get());
  png_set_IHDR(p.png, p.info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(p.png, p.info);
  for (int y = 0; y < img.height; ++y) {
    png_write_row(p.png,
                  const_cast<png_bytep>(
                      img.rgb.data() + static_cast<std::size_t>(y) * img.width * 3));
  }
  png_write_end(p.png, nullptr);
}

Gray16 load_png_gray16(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw DataError("png: cannot open " + path);
  PngReader p;
  Gray16 img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(p.png))) {
    throw DataError("png: failed to decode " + path);
  }
  png_init_io(p.png, f.get());
  png_read_info(p.png, p.info);
  if (png_get_color_type(p.png, p.info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(p.png, p.info) != 16) {
    throw DataError("png: " + path + " is not 16-bit grayscale");
  }
  png_set_swap(p.png);  // PNG stores 16-bit big-endian
  png_read_update_info(p.png, p.info);

  img.resize(png_get_image_height(p.png, p.info),
             png_get_image_width(p.png, p.info));
  rows.resize(img.rows());
  for (Eigen::Index y = 0; y < img.rows(); ++y) {
    rows[y] = reinterpret_cast<png_bytep>(img.data() + y * img.cols());
  }
  png_read_image(p.png, rows.data());
  png_read_end(p.png, nullptr);
  return img;
}

void save_png_gray16(const std::string& path, const Gray16& img) {
  if (img.rows() <= 0 || img.cols() <= 0) {
    throw DataError("png: refusing to write empty depth map " + path);
  }
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw DataError("png: cannot write " + path);
  PngWriter p;
  if (setjmp(png_jmpbuf(p.png))) {
    throw DataError("png: failed to encode " + path);
  }
  png_init_io(p.png, f.get());
  png_set_IHDR(p.png, p.info, static_cast<png_uint_32>(img.cols()),
               static_cast<png_uint_32>(img.rows()), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(p.png, p.info);
  png_set_swap(p.png);
  for (Eigen::Index y = 0; y < img.rows(); ++y) {
    png_write_row(p.png, reinterpret_cast<png_bytep>(const_cast<std::uint16_t*>(
                             img.data() + y * img.cols())));
  }
  png_write_end(p.png, nullptr);
}

}  // namespace egostereo::io
