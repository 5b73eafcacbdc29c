#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "egostereo/model/config.hpp"
#include "egostereo/nn/attention.hpp"
#include "egostereo/nn/conv.hpp"
#include "egostereo/nn/ops.hpp"
#include "egostereo/nn/params.hpp"

namespace egostereo::model {

// Stage 2: temporal transformer that turns per-frame stereo heatmaps and
// scene-depth observations into 3-d joint positions for every frame of the
// window, expressed in each frame's device coordinates.
//
// Memory layout per window sample (token rows, in order):
//   for t, for view: depth tokens (depth_grid^2 each)   [skipped w/o depth]
//   for t, for view: heatmap tokens (hm_grid^2 each)
// Each token gets sinusoidal 2-d position plus learned frame and stream
// embeddings (stream: depth-left, depth-right, hm-left, hm-right).
// A missing depth observation contributes -inf to the attention logits of
// its tokens, which removes them exactly; without the padding mask the
// decoder attends to the zero-filled placeholder tokens instead.

// (h*w, dim) sinusoidal grid embedding, rows y-major. dim % 4 == 0.
template <class S>
nn::Tensor<S> sinusoidal_2d(int h, int w, int dim) {
  if (dim % 4 != 0) throw ShapeError("sinusoidal_2d: dim must be 4k");
  nn::Tensor<S> pe({h * w, dim});
  const int quarter = dim / 4;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      S* row = pe.ptr() + static_cast<std::int64_t>(y * w + x) * dim;
      for (int k = 0; k < quarter; ++k) {
        const double f =
            std::pow(10000.0, -static_cast<double>(k) / quarter);
        row[4 * k + 0] = static_cast<S>(std::sin(x * f));
        row[4 * k + 1] = static_cast<S>(std::cos(x * f));
        row[4 * k + 2] = static_cast<S>(std::sin(y * f));
        row[4 * k + 3] = static_cast<S>(std::cos(y * f));
      }
    }
  }
  return pe;
}

template <class S>
void pose_net_init(nn::ParamStore<S>& ps, const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  const int c = cfg.width;
  const int hid = cfg.hidden();
  auto conv = [&](const std::string& name, int co, int ci, int k) {
    ps.add("p3." + name + ".w",
           nn::he_init<S>(rng, {co, ci, k, k},
                          static_cast<std::int64_t>(ci) * k * k));
    ps.add("p3." + name + ".b", nn::Tensor<S>({co}));
  };
  auto lin = [&](const std::string& name, int out, int in, double stddev) {
    ps.add("p3." + name + ".w", nn::normal_init<S>(rng, {out, in}, stddev));
    ps.add("p3." + name + ".b", nn::Tensor<S>({out}));
  };
  auto ln = [&](const std::string& name) {
    ps.add("p3." + name + ".g", nn::Tensor<S>::full({hid}, S(1)));
    ps.add("p3." + name + ".b", nn::Tensor<S>({hid}));
  };

  // Heatmap token extractor: J -> C/8 -> C/4 -> C/2 -> C, then 1x1 to C/2.
  conv("hm1", c / 8, cfg.heatmap_joints, 4);
  conv("hm2", c / 4, c / 8, 4);
  conv("hm3", c / 2, c / 4, 3);
  conv("hm4", c, c / 2, 3);
  conv("hm5", hid, c, 1);
  // Depth token extractor: 2 -> C/8 -> C/4 -> C/2 -> C/2 -> C/2.
  conv("dp1", c / 8, 2, 4);
  conv("dp2", c / 4, c / 8, 4);
  conv("dp3", c / 2, c / 4, 4);
  conv("dp4", c / 2, c / 2, 3);
  conv("dp5", hid, c / 2, 3);
  // Stereo image context: 1x1 fuse of both bottlenecks, then one fc over
  // the whole window.
  conv("fuse", hid, 2 * c, 1);
  lin("ctx", hid, cfg.t_window * hid, 0.02);

  ps.add("p3.emb.frame", nn::normal_init<S>(rng, {cfg.t_window, hid}, 0.02));
  ps.add("p3.emb.stream", nn::normal_init<S>(rng, {4, hid}, 0.02));
  ps.add("p3.emb.joint", nn::normal_init<S>(rng, {cfg.joint_count, hid}, 0.02));
  ps.add("p3.emb.qframe", nn::normal_init<S>(rng, {cfg.t_window, hid}, 0.02));

  for (int l = 0; l < cfg.decoder_layers; ++l) {
    const std::string pre = "l" + std::to_string(l) + ".";
    ln(pre + "ln1");
    lin(pre + "sq", hid, hid, 0.02);
    lin(pre + "sk", hid, hid, 0.02);
    lin(pre + "sv", hid, hid, 0.02);
    lin(pre + "so", hid, hid, 0.02);
    ln(pre + "ln2");
    lin(pre + "cq", hid, hid, 0.02);
    lin(pre + "ck", hid, hid, 0.02);
    lin(pre + "cv", hid, hid, 0.02);
    lin(pre + "co", hid, hid, 0.02);
    ln(pre + "ln3");
    lin(pre + "f1", cfg.mlp_dim(), hid, 0.02);
    lin(pre + "f2", hid, cfg.mlp_dim(), 0.02);
  }
  ln("lnf");
  lin("head1", c / 4, hid, 0.02);
  lin("head2", c / 8, c / 4, 0.02);
  lin("head3", 3, c / 8, 0.01);
}

// Constant per-batch inputs. Heatmaps come from the frozen 2-d stage,
// depth from the observation provider, features from the frozen encoder
// bottlenecks of both views (concatenated along channels).
template <class S>
struct PoseNetInputs {
  nn::Tensor<S> heatmaps;  // (B*T*2, J, image/4, image/4)
  nn::Tensor<S> depth;     // (B*T*2, 2, image/4, image/4)
  nn::Tensor<S> features;  // (B*T, 2C, image/32, image/32)
  // Row-major (B,T,2): true where the depth observation is missing.
  std::vector<std::uint8_t> depth_missing;
};

struct PoseNetOut {
  int pred = -1;    // (B*T*joint_count, 3) device-frame positions
  int memory = -1;  // decoder memory tokens, exposed for tests
  int batch = 0;
};

template <class S>
PoseNetOut pose_net_forward(nn::Tape<S>& t, const nn::BoundParams<S>& p,
                            const ModelConfig& cfg,
                            const PoseNetInputs<S>& in) {
  cfg.validate();
  const int T = cfg.t_window;
  const int hid = cfg.hidden();
  const int hg = cfg.hm_grid(), dg = cfg.depth_grid();
  const int hg2 = hg * hg, dg2 = dg * dg;
  const int nvf = static_cast<int>(in.heatmaps.dim(0));  // B*T*2
  if (nvf % (2 * T) != 0)
    throw ShapeError("pose_net: heatmap batch not divisible by 2*t_window");
  const int B = nvf / (2 * T);
  if (in.features.dim(0) != B * T || in.features.dim(1) != 2 * cfg.width)
    throw ShapeError("pose_net: features want (B*T, 2C, g, g)");
  if (cfg.use_depth &&
      (in.depth.dim(0) != nvf ||
       static_cast<int>(in.depth_missing.size()) != nvf))
    throw ShapeError("pose_net: depth inputs want B*T*2 entries");

  auto cv = [&](const char* name, int x, int stride, int pad, bool act) {
    const int y = nn::conv2d(t, x, p.at(std::string("p3.") + name + ".w"),
                             p.at(std::string("p3.") + name + ".b"), stride,
                             pad);
    return act ? nn::relu(t, y) : y;
  };
  auto li = [&](const std::string& name, int x) {
    return nn::linear(t, x, p.at("p3." + name + ".w"),
                      p.at("p3." + name + ".b"));
  };
  auto lnorm = [&](const std::string& name, int x) {
    return nn::layernorm(t, x, p.at("p3." + name + ".g"),
                         p.at("p3." + name + ".b"));
  };

  // --- token extractors ---
  const int hm_in = t.input(in.heatmaps);
  int h = cv("hm1", hm_in, 2, 1, true);
  h = cv("hm2", h, 2, 1, true);
  h = cv("hm3", h, 1, 1, true);
  h = cv("hm4", h, 1, 1, true);
  h = cv("hm5", h, 1, 0, false);
  const int hm_tokens = nn::nchw_to_tokens(t, h);  // (B*T*2*hg2, hid)

  int mem_tokens;
  if (cfg.use_depth) {
    const int dp_in = t.input(in.depth);
    int d = cv("dp1", dp_in, 2, 1, true);
    d = cv("dp2", d, 2, 1, true);
    d = cv("dp3", d, 2, 1, true);
    d = cv("dp4", d, 1, 1, true);
    d = cv("dp5", d, 1, 1, false);
    const int dp_tokens = nn::nchw_to_tokens(t, d);  // (B*T*2*dg2, hid)
    // Reorder the two stacks into per-sample blocks: depth first, then
    // heatmaps, both t-major then view.
    auto idx = std::make_shared<std::vector<int>>();
    idx->reserve(static_cast<std::size_t>(B) * cfg.memory_tokens());
    const int dp_rows = nvf * dg2;
    for (int b = 0; b < B; ++b) {
      for (int tv = 0; tv < 2 * T; ++tv)
        for (int i = 0; i < dg2; ++i)
          idx->push_back((b * 2 * T + tv) * dg2 + i);
      for (int tv = 0; tv < 2 * T; ++tv)
        for (int i = 0; i < hg2; ++i)
          idx->push_back(dp_rows + (b * 2 * T + tv) * hg2 + i);
    }
    mem_tokens = nn::gather_rows(
        t, nn::concat_rows(t, {dp_tokens, hm_tokens}), idx);
  } else {
    mem_tokens = hm_tokens;  // already per-sample blocks in (t, view) order
  }

  // --- additive embeddings ---
  const int m_per = cfg.tokens_per_view_frame() * 2 * T;
  nn::Tensor<S> pos({B * m_per, hid});
  {
    const nn::Tensor<S> pe_d = sinusoidal_2d<S>(dg, dg, hid);
    const nn::Tensor<S> pe_h = sinusoidal_2d<S>(hg, hg, hid);
    S* dst = pos.ptr();
    for (int b = 0; b < B; ++b) {
      if (cfg.use_depth) {
        for (int tv = 0; tv < 2 * T; ++tv) {
          std::copy(pe_d.ptr(), pe_d.ptr() + pe_d.size(), dst);
          dst += pe_d.size();
        }
      }
      for (int tv = 0; tv < 2 * T; ++tv) {
        std::copy(pe_h.ptr(), pe_h.ptr() + pe_h.size(), dst);
        dst += pe_h.size();
      }
    }
  }
  auto frame_idx = std::make_shared<std::vector<int>>();
  auto stream_idx = std::make_shared<std::vector<int>>();
  frame_idx->reserve(pos.dim(0));
  stream_idx->reserve(pos.dim(0));
  for (int b = 0; b < B; ++b) {
    if (cfg.use_depth) {
      for (int tt = 0; tt < T; ++tt)
        for (int v = 0; v < 2; ++v)
          for (int i = 0; i < dg2; ++i) {
            frame_idx->push_back(tt);
            stream_idx->push_back(v);  // depth-left, depth-right
          }
    }
    for (int tt = 0; tt < T; ++tt)
      for (int v = 0; v < 2; ++v)
        for (int i = 0; i < hg2; ++i) {
          frame_idx->push_back(tt);
          stream_idx->push_back(2 + v);  // hm-left, hm-right
        }
  }
  int mem = nn::add(t, mem_tokens, t.input(std::move(pos)));
  mem = nn::add(t, mem, nn::gather_rows(t, p.at("p3.emb.frame"), frame_idx));
  mem = nn::add(t, mem, nn::gather_rows(t, p.at("p3.emb.stream"), stream_idx));

  // --- attention bias for missing depth ---
  std::shared_ptr<const nn::Tensor<S>> mask;
  if (cfg.use_depth && cfg.use_padding_mask) {
    auto m = std::make_shared<nn::Tensor<S>>(
        std::vector<int>{B * m_per});
    const S ninf = -std::numeric_limits<S>::infinity();
    for (int b = 0; b < B; ++b) {
      S* row = m->ptr() + static_cast<std::int64_t>(b) * m_per;
      for (int tv = 0; tv < 2 * T; ++tv) {
        if (in.depth_missing[b * 2 * T + tv]) {
          std::fill(row + tv * dg2, row + (tv + 1) * dg2, ninf);
        }
      }
    }
    mask = std::move(m);
  }

  // --- image context -> query augmentation ---
  const int feat_in = t.input(in.features);
  const int fused = cv("fuse", feat_in, 1, 0, true);      // (B*T, hid, dg, dg)
  const int pooled = nn::global_avg_pool(t, fused);       // (B*T, hid)
  const int ctx = li("ctx", nn::reshape(t, pooled, {B, T * hid}));  // (B, hid)

  const int J = cfg.joint_count;
  auto qj = std::make_shared<std::vector<int>>();
  auto qt = std::make_shared<std::vector<int>>();
  auto qb = std::make_shared<std::vector<int>>();
  for (int b = 0; b < B; ++b)
    for (int tt = 0; tt < T; ++tt)
      for (int j = 0; j < J; ++j) {
        qj->push_back(j);
        qt->push_back(tt);
        qb->push_back(b);
      }
  int x = nn::add(t, nn::gather_rows(t, p.at("p3.emb.joint"), qj),
                  nn::gather_rows(t, p.at("p3.emb.qframe"), qt));
  x = nn::add(t, x, nn::gather_rows(t, ctx, qb));  // (B*T*J, hid)

  // --- pre-norm transformer decoder ---
  for (int l = 0; l < cfg.decoder_layers; ++l) {
    const std::string pre = "l" + std::to_string(l) + ".";
    {
      const int xn = lnorm(pre + "ln1", x);
      const int a = nn::attention_core(
          t, li(pre + "sq", xn), li(pre + "sk", xn), li(pre + "sv", xn), B,
          cfg.heads, nullptr);
      x = nn::add(t, x, li(pre + "so", a));
    }
    {
      const int xn = lnorm(pre + "ln2", x);
      const int a = nn::attention_core(t, li(pre + "cq", xn),
                                       li(pre + "ck", mem),
                                       li(pre + "cv", mem), B, cfg.heads,
                                       mask);
      x = nn::add(t, x, li(pre + "co", a));
    }
    {
      const int xn = lnorm(pre + "ln3", x);
      x = nn::add(t, x, li(pre + "f2", nn::relu(t, li(pre + "f1", xn))));
    }
  }
  x = lnorm("lnf", x);
  x = nn::relu(t, li("head1", x));
  x = nn::relu(t, li("head2", x));

  PoseNetOut out;
  out.pred = li("head3", x);
  out.memory = mem;
  out.batch = B;
  return out;
}

// Training loss over a window batch. pred/gt: (B*T*J, 3) device-frame
// meters. Per frame slot the loss is
//   lambda_pose * (mean-per-joint error in millimeters
//                  + lambda_cos * (- sum of bone cosine similarities));
// the last frame of each window counts with weight 1, all earlier frames
// share weight 1/(T-1). The batch dimension is averaged. Bones whose
// predicted or true length is zero contribute nothing (and no gradient).
template <class S>
int pose_sequence_loss(
    nn::Tape<S>& t, int pred, const nn::Tensor<S>& gt, const ModelConfig& cfg,
    std::shared_ptr<const std::vector<std::pair<int, int>>> edges) {
  const auto& pv = t.val(pred);
  if (pv.ndim() != 2 || pv.dim(1) != 3 || !pv.same_shape(gt))
    throw ShapeError("pose_sequence_loss: want matching (B*T*J, 3)");
  const int T = cfg.t_window, J = cfg.joint_count;
  if (pv.dim(0) % (T * J) != 0)
    throw ShapeError("pose_sequence_loss: rows not divisible by T*J");
  const int B = pv.dim(0) / (T * J);
  const S lp = static_cast<S>(cfg.lambda_pose);
  const S lc = static_cast<S>(cfg.lambda_cos);
  auto gt_copy = std::make_shared<nn::Tensor<S>>(gt);

  auto frame_weight = [T](int k) {
    return k == T - 1 ? S(1) : S(1) / static_cast<S>(T - 1);
  };

  S total = S(0);
  {
    nn::ConstMatMap<S> P(pv.ptr(), pv.dim(0), 3);
    nn::ConstMatMap<S> G(gt_copy->ptr(), pv.dim(0), 3);
    for (int b = 0; b < B; ++b) {
      for (int k = 0; k < T; ++k) {
        const int base = (b * T + k) * J;
        S sum_norm = S(0);
        for (int j = 0; j < J; ++j)
          sum_norm += (P.row(base + j) - G.row(base + j)).norm();
        const S mpjpe_mm = S(1000) * sum_norm / static_cast<S>(J);
        S cos_sum = S(0);
        for (const auto& [pa, ch] : *edges) {
          const Eigen::Matrix<S, 1, 3> bp =
              P.row(base + ch) - P.row(base + pa);
          const Eigen::Matrix<S, 1, 3> bg =
              G.row(base + ch) - G.row(base + pa);
          const S np = bp.norm(), ng = bg.norm();
          if (np > S(0) && ng > S(0)) cos_sum += bp.dot(bg) / (np * ng);
        }
        total += frame_weight(k) * lp * (mpjpe_mm - lc * cos_sum) /
                 static_cast<S>(B);
      }
    }
  }

  nn::Tensor<S> out({1});
  out.data[0] = total;
  return t.emit(
      std::move(out), t.needs_grad(pred),
      [pred, gt_copy, edges, B, T, J, lp, lc,
       frame_weight](nn::Tape<S>& t, int o) {
        const S g0 = t.grad(o).data[0];
        const auto& pv = t.val(pred);
        nn::ConstMatMap<S> P(pv.ptr(), pv.dim(0), 3);
        nn::ConstMatMap<S> G(gt_copy->ptr(), pv.dim(0), 3);
        auto Gr = t.grad(pred).mat2d();
        for (int b = 0; b < B; ++b) {
          for (int k = 0; k < T; ++k) {
            const int base = (b * T + k) * J;
            const S f = g0 * frame_weight(k) * lp / static_cast<S>(B);
            for (int j = 0; j < J; ++j) {
              const Eigen::Matrix<S, 1, 3> d =
                  P.row(base + j) - G.row(base + j);
              const S n = d.norm();
              if (n > S(0))
                Gr.row(base + j) += f * S(1000) / static_cast<S>(J) * d / n;
            }
            for (const auto& [pa, ch] : *edges) {
              const Eigen::Matrix<S, 1, 3> bp =
                  P.row(base + ch) - P.row(base + pa);
              const Eigen::Matrix<S, 1, 3> bg =
                  G.row(base + ch) - G.row(base + pa);
              const S np = bp.norm(), ng = bg.norm();
              if (!(np > S(0) && ng > S(0))) continue;
              const S cos = bp.dot(bg) / (np * ng);
              const Eigen::Matrix<S, 1, 3> gb =
                  f * lc * (cos * bp / (np * np) - bg / (np * ng));
              Gr.row(base + ch) += gb;
              Gr.row(base + pa) -= gb;
            }
          }
        }
      });
}

}  // namespace egostereo::model
