#include "egostereo/data/heatmap_target.hpp"

#include <cmath>

#include "egostereo/errors.hpp"

namespace egostereo::data {

nn::Tensor<float> render_gt_heatmap(const Joints2D& joints, int out_w,
                                    int out_h, double sigma,
                                    double downscale) {
  if (joints.px.rows() != static_cast<Eigen::Index>(joints.visible.size())) {
    throw ConfigError("render_gt_heatmap: px/visible size mismatch");
  }
  if (out_w <= 0 || out_h <= 0 || sigma <= 0.0 || downscale <= 0.0) {
    throw ConfigError("render_gt_heatmap: bad geometry");
  }
  const int j = joints.count();
  nn::Tensor<float> maps({j, out_h, out_w});
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  for (int c = 0; c < j; ++c) {
    if (!joints.visible[c]) continue;
    const double cu = joints.px(c, 0) / downscale;
    const double cv = joints.px(c, 1) / downscale;
    float* plane = maps.ptr() + static_cast<std::int64_t>(c) * out_h * out_w;
    for (int y = 0; y < out_h; ++y) {
      const double dy2 = (y - cv) * (y - cv);
      for (int x = 0; x < out_w; ++x) {
        const double dx2 = (x - cu) * (x - cu);
        plane[y * out_w + x] =
            static_cast<float>(std::exp(-(dx2 + dy2) * inv2s2));
      }
    }
  }
  return maps;
}

HeatmapPeak heatmap_argmax(const float* plane, int w, int h) {
  HeatmapPeak best;
  best.value = plane[0];
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float v = plane[y * w + x];
      if (v > best.value) {
        best.value = v;
        best.u = x;
        best.v = y;
      }
    }
  }
  return best;
}

std::vector<HeatmapPeak> heatmap_argmax_all(const nn::Tensor<float>& maps) {
  if (maps.ndim() != 3) throw ShapeError("heatmap_argmax_all: want (J,H,W)");
  const int j = maps.dim(0), h = maps.dim(1), w = maps.dim(2);
  std::vector<HeatmapPeak> out(j);
  for (int c = 0; c < j; ++c) {
    out[c] = heatmap_argmax(
        maps.ptr() + static_cast<std::int64_t>(c) * h * w, w, h);
  }
  return out;
}

std::vector<std::optional<Eigen::Vector2d>> extract_prompts(
    const nn::Tensor<float>& maps, float threshold) {
  std::vector<std::optional<Eigen::Vector2d>> out;
  for (const auto& p : heatmap_argmax_all(maps)) {
    if (p.value >= threshold) {
      out.emplace_back(Eigen::Vector2d(p.u, p.v));
    } else {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

}  // namespace egostereo::data
