#pragma once

#include <string>

#include "egostereo/model/config.hpp"
#include "egostereo/nn/conv.hpp"
#include "egostereo/nn/ops.hpp"
#include "egostereo/nn/params.hpp"

namespace egostereo::model {

// Stage 1: stereo 2-d joint localizer. One shared-weight encoder/decoder
// processes each view independently (the batch dimension carries both
// views); the bottleneck feature is reused later as the image context for
// the pose decoder.
//
// Encoder: five stride-2 3x3 convs, C/8 C/8 C/4 C/2 C channels.
// Decoder: three (upsample, skip-concat, 3x3 conv) blocks back to 1/4
// resolution, then a linear 3x3 conv onto one heatmap per joint.

template <class S>
void heatmap_net_init(nn::ParamStore<S>& ps, const ModelConfig& cfg,
                      Rng& rng) {
  cfg.validate();
  const int c = cfg.width;
  const int j = cfg.heatmap_joints;
  auto conv = [&](const std::string& name, int co, int ci, int k) {
    ps.add("hm." + name + ".w",
           nn::he_init<S>(rng, {co, ci, k, k},
                          static_cast<std::int64_t>(ci) * k * k));
    ps.add("hm." + name + ".b", nn::Tensor<S>({co}));
  };
  conv("e1", c / 8, 3, 3);
  conv("e2", c / 8, c / 8, 3);
  conv("e3", c / 4, c / 8, 3);
  conv("e4", c / 2, c / 4, 3);
  conv("e5", c, c / 2, 3);
  conv("d1", c / 2, c + c / 2, 3);
  conv("d2", c / 4, c / 2 + c / 4, 3);
  conv("d3", c / 8, c / 4 + c / 8, 3);
  conv("out", j, c / 8, 3);
}

struct HeatmapOut {
  int heatmaps = -1;  // (N, J, H/4, W/4), linear activations
  int feature = -1;   // (N, C, H/32, W/32) bottleneck
};

template <class S>
HeatmapOut heatmap_net_forward(nn::Tape<S>& t, const nn::BoundParams<S>& p,
                               const ModelConfig& cfg, int x) {
  const auto& xv = t.val(x);
  if (xv.ndim() != 4 || xv.dim(1) != 3 || xv.dim(2) != cfg.image_size ||
      xv.dim(3) != cfg.image_size)
    throw ShapeError("heatmap_net: want (N, 3, image_size, image_size)");
  auto block = [&](const std::string& name, int in, int stride) {
    return nn::relu(t, nn::conv2d(t, in, p.at("hm." + name + ".w"),
                                  p.at("hm." + name + ".b"), stride, 1));
  };
  const int e1 = block("e1", x, 2);
  const int e2 = block("e2", e1, 2);
  const int e3 = block("e3", e2, 2);
  const int e4 = block("e4", e3, 2);
  const int e5 = block("e5", e4, 2);
  const int d1 = block("d1", nn::concat_channels(t, nn::upsample2x(t, e5), e4), 1);
  const int d2 = block("d2", nn::concat_channels(t, nn::upsample2x(t, d1), e3), 1);
  const int d3 = block("d3", nn::concat_channels(t, nn::upsample2x(t, d2), e2), 1);
  HeatmapOut out;
  out.heatmaps = nn::conv2d(t, d3, p.at("hm.out.w"), p.at("hm.out.b"), 1, 1);
  out.feature = e5;
  return out;
}

}  // namespace egostereo::model
