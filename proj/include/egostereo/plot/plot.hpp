#pragma once

#include <array>
#include <string>
#include <vector>

#include "egostereo/io/png_io.hpp"

namespace egostereo::plot {

struct Series {
  std::string label;
  std::vector<double> values;  // y per integer x, starting at 0
};

// Built-in 5x7 bitmap font (digits, latin letters, basic punctuation).
// Unknown characters render as a hollow box. Returns the pixel width.
int draw_text(io::Image& img, int x, int y, const std::string& text,
              std::array<std::uint8_t, 3> color, int scale = 1);
int text_width(const std::string& text, int scale = 1);

struct CurvePlotOptions {
  int width = 960;
  int height = 540;
  std::string title;
  std::string x_label = "frame";
  std::string y_label = "mpjpe (mm)";
};

// Line chart with axes, tick labels, and a legend. Throws ConfigError on
// empty input and DataError when the file cannot be written.
io::Image render_curves(const std::vector<Series>& series,
                        const CurvePlotOptions& opt);
void save_curve_png(const std::string& path,
                    const std::vector<Series>& series,
                    const CurvePlotOptions& opt);

}  // namespace egostereo::plot
