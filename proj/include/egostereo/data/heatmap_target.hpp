#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "egostereo/nn/tensor.hpp"

namespace egostereo::data {

// Per-view 2-d annotations at full image resolution. Rows follow the
// skeleton's heatmap joint list. A joint that projects outside the lens
// circle is marked invisible and its target channel stays all-zero.
struct Joints2D {
  Eigen::Matrix<double, Eigen::Dynamic, 2> px;
  std::vector<std::uint8_t> visible;

  int count() const { return static_cast<int>(px.rows()); }
};

// Unnormalized Gaussian targets: channel j peaks at 1.0 at px/downscale
// with the given sigma (in target pixels). Shape (J, out_h, out_w).
nn::Tensor<float> render_gt_heatmap(const Joints2D& joints, int out_w,
                                    int out_h, double sigma = 1.5,
                                    double downscale = 4.0);

struct HeatmapPeak {
  int u = 0;  // x / column
  int v = 0;  // y / row
  float value = 0.0f;
};

// Strict row-major argmax: ties keep the first value scanned (smallest v,
// then smallest u).
HeatmapPeak heatmap_argmax(const float* plane, int w, int h);

// One peak per channel of a (J,H,W) tensor.
std::vector<HeatmapPeak> heatmap_argmax_all(const nn::Tensor<float>& maps);

// Peaks above the confidence threshold, as prompt points for a mask
// predictor; below-threshold channels give nullopt.
std::vector<std::optional<Eigen::Vector2d>> extract_prompts(
    const nn::Tensor<float>& maps, float threshold = 0.3f);

}  // namespace egostereo::data
