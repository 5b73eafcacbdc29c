#include <doctest.h>

#include <filesystem>

#include "egostereo/errors.hpp"
#include "egostereo/plot/plot.hpp"

using namespace egostereo;
namespace fs = std::filesystem;

namespace {

int count_color(const io::Image& img, std::uint8_t r, std::uint8_t g,
                std::uint8_t b) {
  int n = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const auto* p = img.px(x, y);
      if (p[0] == r && p[1] == g && p[2] == b) ++n;
    }
  return n;
}

}  // namespace

TEST_CASE("bitmap text renders known glyph pixels") {
  io::Image img = io::Image::filled(64, 16, 255, 255, 255);
  const int w = plot::draw_text(img, 2, 2, "a1", {0, 0, 0});
  CHECK(w == 12);
  CHECK(plot::text_width("abc") == 18);
  // 'a' top row pattern 0x0E: columns 1..3 set at origin (2,2)
  CHECK(img.px(2 + 1, 2)[0] == 0);
  CHECK(img.px(2 + 2, 2)[0] == 0);
  CHECK(img.px(2 + 3, 2)[0] == 0);
  CHECK(img.px(2 + 0, 2)[0] == 255);
  CHECK(img.px(2 + 4, 2)[0] == 255);
  // '1' center column (glyph column 2) is set over rows 0..5
  CHECK(img.px(2 + 6 + 2, 2 + 3)[0] == 0);

  // uppercase maps onto the same glyphs
  io::Image up = io::Image::filled(64, 16, 255, 255, 255);
  io::Image low = io::Image::filled(64, 16, 255, 255, 255);
  plot::draw_text(up, 0, 0, "XYZ", {0, 0, 0});
  plot::draw_text(low, 0, 0, "xyz", {0, 0, 0});
  CHECK(up.rgb == low.rgb);

  // scale doubles every set pixel
  io::Image big = io::Image::filled(64, 32, 255, 255, 255);
  plot::draw_text(big, 0, 0, "a", {0, 0, 0}, 2);
  CHECK(big.px(2, 0)[0] == 0);
  CHECK(big.px(3, 1)[0] == 0);
}

TEST_CASE("curve chart draws axes, series, and legend deterministically") {
  std::vector<plot::Series> series = {
      {"walk_0", {5.0, 9.0, 7.5, 12.0, 8.0}},
      {"wave_1", {2.0, 3.0, 2.5, 6.0, 4.0}},
  };
  plot::CurvePlotOptions opt;
  opt.title = "pose error";
  const io::Image img = plot::render_curves(series, opt);
  CHECK(img.width == opt.width);
  CHECK(img.height == opt.height);

  // white background in the top-left margin corner
  CHECK(img.px(1, 1)[0] == 255);
  // both series colors appear (curve plus legend swatch)
  CHECK(count_color(img, 214, 69, 65) > 20);
  CHECK(count_color(img, 31, 119, 180) > 20);
  // axis pixels are dark
  CHECK(img.px(70, img.height - 52)[0] == 20);

  const io::Image again = plot::render_curves(series, opt);
  CHECK(img.rgb == again.rgb);

  CHECK_THROWS_AS(plot::render_curves({}, opt), ConfigError);
  std::vector<plot::Series> bad = {{"x", {1.0, std::nan("")}}};
  CHECK_THROWS_AS(plot::render_curves(bad, opt), ConfigError);
  plot::CurvePlotOptions tiny;
  tiny.width = 10;
  tiny.height = 10;
  CHECK_THROWS_AS(plot::render_curves(series, tiny), ConfigError);
}

TEST_CASE("curve chart writes a loadable png") {
  const fs::path path =
      fs::temp_directory_path() / "egostereo_test_plot" / "curve.png";
  fs::create_directories(path.parent_path());
  std::vector<plot::Series> series = {{"seq", {1.0, 4.0, 2.0}}};
  plot::CurvePlotOptions opt;
  opt.title = "test";
  plot::save_curve_png(path.string(), series, opt);
  const io::Image back = io::load_png_rgb(path.string());
  CHECK(back.width == opt.width);
  CHECK(back.height == opt.height);
  const io::Image direct = plot::render_curves(series, opt);
  CHECK(back.rgb == direct.rgb);
}
