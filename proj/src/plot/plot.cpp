#include "egostereo/plot/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "egostereo/errors.hpp"

namespace egostereo::plot {

namespace {

// 7 rows of 5-bit patterns, bit 4 = leftmost pixel.
using Glyph = std::array<std::uint8_t, 7>;

const std::map<char, Glyph>& font() {
  static const std::map<char, Glyph> table = {
      {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
      {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
      {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
      {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
      {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
      {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
      {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
      {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
      {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
      {'a', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'b', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
      {'c', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
      {'d', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
      {'e', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
      {'f', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
      {'g', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
      {'h', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'i', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'j', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
      {'k', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
      {'l', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
      {'m', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
      {'n', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
      {'o', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'p', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
      {'q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
      {'r', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
      {'s', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
      {'t', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
      {'u', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'v', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
      {'w', {0x11, 0x11, 0x11, 0x15, 0x15, 0x1B, 0x11}},
      {'x', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
      {'y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
      {'z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
      {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
      {',', {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}},
      {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
      {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
      {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
      {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
      {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
      {'/', {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10}},
      {'%', {0x19, 0x1A, 0x02, 0x04, 0x08, 0x0B, 0x13}},
      {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
      {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
  };
  return table;
}

const Glyph kBox = {0x1F, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1F};

char normalize(char c) {
  if (c >= 'A' && c <= 'Z') return static_cast<char>(c - 'A' + 'a');
  return c;
}

void put_px(io::Image& img, int x, int y,
            const std::array<std::uint8_t, 3>& c) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  std::uint8_t* p = img.px(x, y);
  p[0] = c[0];
  p[1] = c[1];
  p[2] = c[2];
}

void draw_line(io::Image& img, int x0, int y0, int x1, int y1,
               const std::array<std::uint8_t, 3>& c) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    put_px(img, x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

// Round tick step: 1, 2, or 5 times a power of ten covering span/target.
double nice_step(double span, int target_ticks) {
  const double raw = span / std::max(1, target_ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

std::string format_tick(double v) {
  char buf[32];
  if (std::abs(v - std::round(v)) < 1e-9)
    std::snprintf(buf, sizeof(buf), "%.0f", v);
  else
    std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

const std::array<std::array<std::uint8_t, 3>, 8> kPalette = {{
    {214, 69, 65},
    {31, 119, 180},
    {44, 160, 44},
    {148, 103, 189},
    {255, 127, 14},
    {23, 190, 207},
    {140, 86, 75},
    {227, 119, 194},
}};

}  // namespace

int text_width(const std::string& text, int scale) {
  return static_cast<int>(text.size()) * 6 * scale;
}

int draw_text(io::Image& img, int x, int y, const std::string& text,
              std::array<std::uint8_t, 3> color, int scale) {
  int cx = x;
  for (char raw : text) {
    const char c = normalize(raw);
    const auto it = font().find(c);
    const Glyph& g = it == font().end() ? kBox : it->second;
    for (int row = 0; row < 7; ++row)
      for (int col = 0; col < 5; ++col)
        if (g[row] & (1 << (4 - col)))
          for (int sy = 0; sy < scale; ++sy)
            for (int sx = 0; sx < scale; ++sx)
              put_px(img, cx + col * scale + sx, y + row * scale + sy, color);
    cx += 6 * scale;
  }
  return cx - x;
}

io::Image render_curves(const std::vector<Series>& series,
                        const CurvePlotOptions& opt) {
  if (series.empty()) throw ConfigError("plot: no series");
  std::size_t max_len = 0;
  double max_v = 0.0;
  for (const auto& s : series) {
    max_len = std::max(max_len, s.values.size());
    for (double v : s.values) {
      if (!std::isfinite(v)) throw ConfigError("plot: non-finite value");
      max_v = std::max(max_v, v);
    }
  }
  if (max_len < 1) throw ConfigError("plot: empty series");
  if (opt.width < 200 || opt.height < 150)
    throw ConfigError("plot: canvas too small");

  const std::array<std::uint8_t, 3> black{20, 20, 20};
  const std::array<std::uint8_t, 3> grey{210, 210, 210};
  io::Image img = io::Image::filled(opt.width, opt.height, 255, 255, 255);

  const int left = 70, right = 24, top = 44, bottom = 52;
  const int px0 = left, px1 = opt.width - right;
  const int py0 = top, py1 = opt.height - bottom;

  const double x_max = std::max<std::size_t>(max_len - 1, 1);
  const double y_max = max_v > 0.0 ? 1.05 * max_v : 1.0;
  auto to_px = [&](double x, double y) {
    const int X =
        px0 + static_cast<int>(std::lround((px1 - px0) * (x / x_max)));
    const int Y =
        py1 - static_cast<int>(std::lround((py1 - py0) * (y / y_max)));
    return std::pair<int, int>(X, Y);
  };

  // grid + ticks
  const double ys = nice_step(y_max, 5);
  for (double v = 0.0; v <= y_max + 1e-9; v += ys) {
    const auto [X, Y] = to_px(0.0, v);
    draw_line(img, px0, Y, px1, Y, grey);
    const std::string label = format_tick(v);
    draw_text(img, px0 - 8 - text_width(label), Y - 3, label, black);
  }
  const double xs = std::max(1.0, nice_step(x_max, 8));
  for (double v = 0.0; v <= x_max + 1e-9; v += xs) {
    const auto [X, Y] = to_px(v, 0.0);
    draw_line(img, X, py0, X, py1, grey);
    const std::string label = format_tick(v);
    draw_text(img, X - text_width(label) / 2, py1 + 8, label, black);
  }
  // axes over the grid
  draw_line(img, px0, py0, px0, py1, black);
  draw_line(img, px0, py1, px1, py1, black);

  // series
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& color = kPalette[si % kPalette.size()];
    const auto& vals = series[si].values;
    for (std::size_t i = 1; i < vals.size(); ++i) {
      const auto [xa, ya] = to_px(static_cast<double>(i - 1), vals[i - 1]);
      const auto [xb, yb] = to_px(static_cast<double>(i), vals[i]);
      draw_line(img, xa, ya, xb, yb, color);
      draw_line(img, xa, ya + 1, xb, yb + 1, color);  // 2 px thick
    }
    if (vals.size() == 1) {
      const auto [xa, ya] = to_px(0.0, vals[0]);
      for (int d = -2; d <= 2; ++d) {
        put_px(img, xa + d, ya, color);
        put_px(img, xa, ya + d, color);
      }
    }
  }

  // legend, top-right inside the plot area
  int ly = py0 + 8;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& color = kPalette[si % kPalette.size()];
    const std::string& label = series[si].label;
    const int lx = px1 - 30 - text_width(label);
    draw_line(img, lx, ly + 3, lx + 18, ly + 3, color);
    draw_line(img, lx, ly + 4, lx + 18, ly + 4, color);
    draw_text(img, lx + 24, ly, label, black);
    ly += 12;
  }

  // title and axis labels
  draw_text(img, (opt.width - text_width(opt.title, 2)) / 2, 12, opt.title,
            black, 2);
  draw_text(img, (px0 + px1 - text_width(opt.x_label)) / 2, opt.height - 16,
            opt.x_label, black);
  draw_text(img, 8, py0 - 16, opt.y_label, black);
  return img;
}

void save_curve_png(const std::string& path,
                    const std::vector<Series>& series,
                    const CurvePlotOptions& opt) {
  io::save_png_rgb(path, render_curves(series, opt));
}

}  // namespace egostereo::plot
