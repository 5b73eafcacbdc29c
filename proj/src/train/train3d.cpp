#include "egostereo/train/train3d.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "egostereo/data/sample.hpp"
#include "egostereo/data/windows.hpp"
#include "egostereo/model/heatmap_net.hpp"
#include "egostereo/train/schedule.hpp"

namespace egostereo::train {

namespace {

template <class T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[rng.index(i)]);
}

void check_dataset_model(const data::DatasetIndex& index,
                         const model::ModelConfig& cfg) {
  if (index.skeleton.joint_count() != cfg.joint_count)
    throw ConfigError("pose3d: skeleton joint count does not match model");
  if (static_cast<int>(index.skeleton.heatmap_joints.size()) !=
      cfg.heatmap_joints)
    throw ConfigError("pose3d: heatmap joint count does not match model");
}

}  // namespace

FeatureCache build_feature_cache(const data::DatasetIndex& index,
                                 const nn::ParamStore<float>& params2d,
                                 const model::ModelConfig& cfg,
                                 depth::DepthObservationProvider& depth_src) {
  cfg.validate();
  check_dataset_model(index, cfg);
  const int img = cfg.image_size;
  const int hm = cfg.heatmap_size();
  const int dg = cfg.depth_grid();
  const int c = cfg.width;

  FeatureCache cache;
  cache.frames.resize(index.sequences.size());
  for (std::size_t s = 0; s < index.sequences.size(); ++s) {
    const auto& seq = index.sequences[s];
    cache.frames[s].resize(seq.frames.size());
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
      const auto& frame = seq.frames[f];
      FeatureCache::Entry& e = cache.frames[s][f];

      nn::Tensor<float> x({2, 3, img, img});
      for (int v = 0; v < 2; ++v) {
        const auto xi = data::load_image_input(index, frame, v);
        if (xi.dim(1) != img || xi.dim(2) != img)
          throw DataError("pose3d: image resolution does not match model");
        std::memcpy(x.ptr() + static_cast<std::int64_t>(v) * xi.size(),
                    xi.ptr(), sizeof(float) * xi.size());
      }
      nn::Tape<float> t;
      const auto bound = nn::bind_params(t, params2d, false);
      const auto out = model::heatmap_net_forward(t, bound, cfg, t.input(x));
      const auto& hv = t.val(out.heatmaps);  // (2, J, hm, hm)
      const auto& fv = t.val(out.feature);   // (2, C, dg, dg)

      const std::int64_t hm_sz = hv.size() / 2;
      const std::int64_t ft_sz = fv.size() / 2;
      e.features = nn::Tensor<float>({2 * c, dg, dg});
      for (int v = 0; v < 2; ++v) {
        e.heatmaps[v] = nn::Tensor<float>({cfg.heatmap_joints, hm, hm});
        std::memcpy(e.heatmaps[v].ptr(), hv.ptr() + v * hm_sz,
                    sizeof(float) * hm_sz);
        std::memcpy(e.features.ptr() + v * ft_sz, fv.ptr() + v * ft_sz,
                    sizeof(float) * ft_sz);

        const depth::DepthObservation obs =
            depth_src.depth_for(index, seq, frame, v);
        if (obs.depth.rows() != hm || obs.depth.cols() != hm)
          throw DataError("pose3d: depth resolution does not match model");
        e.depth[v] = depth::depth_to_input(obs);
        e.depth_missing[v] = !obs.available;
      }
    }
  }
  return cache;
}

std::vector<WindowRef> all_windows(const data::DatasetIndex& index,
                                   const model::ModelConfig& cfg) {
  std::vector<WindowRef> out;
  for (int s = 0; s < static_cast<int>(index.sequences.size()); ++s) {
    const int len = static_cast<int>(index.sequences[s].frames.size());
    for (auto& w : data::sample_windows(len, cfg.t_window, cfg.skip))
      out.emplace_back(s, std::move(w));
  }
  if (out.empty()) throw DataError("pose3d: dataset has no frames");
  return out;
}

WindowBatch assemble_windows(const data::DatasetIndex& index,
                             const FeatureCache& cache,
                             const model::ModelConfig& cfg,
                             const std::vector<WindowRef>& windows) {
  const int B = static_cast<int>(windows.size());
  if (B < 1) throw ConfigError("pose3d: empty window batch");
  const int T = cfg.t_window;
  const int hm = cfg.heatmap_size();
  const int dg = cfg.depth_grid();
  const int J = cfg.joint_count;

  WindowBatch wb;
  wb.inputs.heatmaps =
      nn::Tensor<float>({B * T * 2, cfg.heatmap_joints, hm, hm});
  wb.inputs.depth = nn::Tensor<float>({B * T * 2, 2, hm, hm});
  wb.inputs.features = nn::Tensor<float>({B * T, 2 * cfg.width, dg, dg});
  wb.inputs.depth_missing.assign(static_cast<std::size_t>(B) * T * 2, 1);
  wb.gt = nn::Tensor<float>({B * T * J, 3});

  const std::int64_t hm_sz = wb.inputs.heatmaps.size() / (B * T * 2LL);
  const std::int64_t dp_sz = wb.inputs.depth.size() / (B * T * 2LL);
  const std::int64_t ft_sz = wb.inputs.features.size() / (B * T);

  for (int b = 0; b < B; ++b) {
    const auto& [s, frames] = windows[b];
    if (static_cast<int>(frames.size()) != T)
      throw ShapeError("pose3d: window length does not match t_window");
    for (int k = 0; k < T; ++k) {
      const int fi = frames[k];
      const auto& entry = cache.frames.at(s).at(fi);
      const auto& frame = index.sequences[s].frames[fi];
      std::memcpy(
          wb.inputs.features.ptr() +
              (static_cast<std::int64_t>(b) * T + k) * ft_sz,
          entry.features.ptr(), sizeof(float) * ft_sz);
      for (int v = 0; v < 2; ++v) {
        const std::int64_t n = (static_cast<std::int64_t>(b) * T + k) * 2 + v;
        std::memcpy(wb.inputs.heatmaps.ptr() + n * hm_sz,
                    entry.heatmaps[v].ptr(), sizeof(float) * hm_sz);
        std::memcpy(wb.inputs.depth.ptr() + n * dp_sz, entry.depth[v].ptr(),
                    sizeof(float) * dp_sz);
        wb.inputs.depth_missing[static_cast<std::size_t>(n)] =
            entry.depth_missing[v] ? 1 : 0;
      }
      const JointMatrix pose = data::gt_pose_device(frame);
      if (pose.rows() != J)
        throw ShapeError("pose3d: ground-truth joint count mismatch");
      auto G = wb.gt.mat2d();
      for (int j = 0; j < J; ++j)
        G.row((static_cast<std::int64_t>(b) * T + k) * J + j) =
            pose.row(j).cast<float>();
    }
  }
  return wb;
}

Train3DStats train_pose_net(const data::DatasetIndex& index,
                            const FeatureCache& cache,
                            const Train3DConfig& cfg,
                            nn::ParamStore<float>& params) {
  cfg.model.validate();
  check_dataset_model(index, cfg.model);
  if (cfg.epochs < 1 || cfg.batch < 1 || cfg.lr <= 0.0)
    throw ConfigError("pose3d: need epochs >= 1, batch >= 1, lr > 0");

  auto windows = all_windows(index, cfg.model);
  const std::int64_t steps_per_epoch =
      (static_cast<std::int64_t>(windows.size()) + cfg.batch - 1) / cfg.batch;
  const std::int64_t total_steps = steps_per_epoch * cfg.epochs;

  std::ofstream log;
  if (!cfg.log_path.empty()) {
    log.open(cfg.log_path, std::ios::trunc);
    if (!log) throw DataError("pose3d: cannot open log " + cfg.log_path);
  }

  auto edges = std::make_shared<const std::vector<std::pair<int, int>>>(
      index.skeleton.bone_edges);
  Rng order_rng(cfg.seed ^ 0x94d049bb133111ebULL);
  nn::Adam<float> adam;
  Train3DStats stats;

  std::int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_in_place(windows, order_rng);
    for (std::size_t pos = 0; pos < windows.size();
         pos += static_cast<std::size_t>(cfg.batch), ++step) {
      const std::size_t bsz =
          std::min<std::size_t>(cfg.batch, windows.size() - pos);
      const std::vector<WindowRef> chunk(windows.begin() + pos,
                                         windows.begin() + pos + bsz);
      const WindowBatch wb = assemble_windows(index, cache, cfg.model, chunk);

      nn::Tape<float> tape;
      const auto bound = nn::bind_params(tape, params, true);
      const auto out =
          model::pose_net_forward(tape, bound, cfg.model, wb.inputs);
      const int loss =
          model::pose_sequence_loss(tape, out.pred, wb.gt, cfg.model, edges);
      const double loss_v = tape.val(loss).data[0];
      if (!std::isfinite(loss_v))
        throw DivergenceError("pose3d: non-finite loss at step " +
                              std::to_string(step));
      tape.backward(loss);
      const double lr = lr_at(step, total_steps, cfg.lr);
      adam.step(params, tape, bound, static_cast<float>(lr));

      if (step == 0) stats.first_loss = loss_v;
      stats.final_loss = loss_v;
      if (log) {
        log << nlohmann::json({{"stage", "pose3d"},
                               {"step", step},
                               {"epoch", epoch},
                               {"lr", lr},
                               {"loss", loss_v}})
                   .dump()
            << "\n";
        log.flush();
      }
    }
  }
  stats.steps = step;
  return stats;
}

Train3DStats run_train_3d(const data::DatasetIndex& index,
                          const std::string& checkpoint_2d,
                          depth::DepthObservationProvider& depth_src,
                          const Train3DConfig& cfg,
                          nn::ParamStore<float>* params_out) {
  const nn::Checkpoint ckpt2d = nn::load_checkpoint(checkpoint_2d);
  const nn::CheckpointSection& sec2d = ckpt2d.at("heatmap2d");
  const model::ModelConfig cfg2d =
      model::config_from_json(sec2d.config.at("model"));
  if (cfg2d.width != cfg.model.width ||
      cfg2d.image_size != cfg.model.image_size ||
      cfg2d.heatmap_joints != cfg.model.heatmap_joints)
    throw ConfigError(
        "pose3d: 2-d checkpoint geometry does not match the model config");

  nn::ParamStore<float> params2d;
  {
    Rng structure_rng(0);
    model::heatmap_net_init<float>(params2d, cfg2d, structure_rng);
  }
  nn::params_from_section(sec2d, params2d);

  const FeatureCache cache =
      build_feature_cache(index, params2d, cfg.model, depth_src);

  nn::ParamStore<float> params3d;
  {
    Rng init_rng(cfg.seed);
    model::pose_net_init<float>(params3d, cfg.model, init_rng);
  }
  const Train3DStats stats = train_pose_net(index, cache, cfg, params3d);

  if (!cfg.checkpoint_path.empty()) {
    nn::Checkpoint out;
    out.seed = cfg.seed;
    out.sections["heatmap2d"] = sec2d;
    nlohmann::json sec_cfg = {{"model", model::config_to_json(cfg.model)},
                              {"seed", cfg.seed},
                              {"steps", stats.steps}};
    out.sections["pose3d"] =
        nn::section_from_params(params3d, std::move(sec_cfg));
    nn::save_checkpoint(cfg.checkpoint_path, out);
  }
  if (params_out) *params_out = std::move(params3d);
  return stats;
}

LoadedModel load_combined_checkpoint(const std::string& path) {
  const nn::Checkpoint ckpt = nn::load_checkpoint(path);
  const auto& sec2d = ckpt.at("heatmap2d");
  const auto& sec3d = ckpt.at("pose3d");
  LoadedModel out;
  out.seed = ckpt.seed;
  out.config = model::config_from_json(sec3d.config.at("model"));
  const model::ModelConfig cfg2d =
      model::config_from_json(sec2d.config.at("model"));
  Rng structure_rng(0);
  model::heatmap_net_init<float>(out.params2d, cfg2d, structure_rng);
  model::pose_net_init<float>(out.params3d, out.config, structure_rng);
  nn::params_from_section(sec2d, out.params2d);
  nn::params_from_section(sec3d, out.params3d);
  return out;
}

}  // namespace egostereo::train
