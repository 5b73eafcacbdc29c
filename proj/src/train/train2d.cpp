#include "egostereo/train/train2d.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "egostereo/data/sample.hpp"
#include "egostereo/model/heatmap_net.hpp"
#include "egostereo/nn/checkpoint.hpp"
#include "egostereo/train/schedule.hpp"

namespace egostereo::train {

namespace {

struct SampleRef {
  int seq;
  int frame;
  int view;
};

std::vector<SampleRef> all_views(const data::DatasetIndex& index) {
  std::vector<SampleRef> out;
  for (int s = 0; s < static_cast<int>(index.sequences.size()); ++s) {
    const auto& seq = index.sequences[s];
    for (int f = 0; f < static_cast<int>(seq.frames.size()); ++f)
      for (int v = 0; v < 2; ++v) out.push_back({s, f, v});
  }
  if (out.empty()) throw DataError("train2d: dataset has no frames");
  return out;
}

template <class T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[rng.index(i)]);
}

}  // namespace

TrainStats train_heatmap_net(const data::DatasetIndex& index,
                             const Train2DConfig& cfg,
                             nn::ParamStore<float>& params) {
  cfg.model.validate();
  if (cfg.epochs < 1 || cfg.batch < 1 || cfg.lr <= 0.0)
    throw ConfigError("train2d: need epochs >= 1, batch >= 1, lr > 0");

  auto samples = all_views(index);
  const std::int64_t steps_per_epoch =
      (static_cast<std::int64_t>(samples.size()) + cfg.batch - 1) / cfg.batch;
  const std::int64_t total_steps = steps_per_epoch * cfg.epochs;

  std::ofstream log;
  if (!cfg.log_path.empty()) {
    log.open(cfg.log_path, std::ios::trunc);
    if (!log) throw DataError("train2d: cannot open log " + cfg.log_path);
  }

  Rng order_rng(cfg.seed ^ 0xd1b54a32d192ed03ULL);
  nn::Adam<float> adam;
  TrainStats stats;

  const int img = cfg.model.image_size;
  const int hm = cfg.model.heatmap_size();
  const int J = cfg.model.heatmap_joints;

  std::int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_in_place(samples, order_rng);
    for (std::size_t pos = 0; pos < samples.size();
         pos += static_cast<std::size_t>(cfg.batch), ++step) {
      const int bsz = static_cast<int>(
          std::min<std::size_t>(cfg.batch, samples.size() - pos));
      nn::Tensor<float> x({bsz, 3, img, img});
      nn::Tensor<float> target({bsz, J, hm, hm});
      for (int b = 0; b < bsz; ++b) {
        const SampleRef& ref = samples[pos + b];
        const auto& frame = index.sequences[ref.seq].frames[ref.frame];
        const auto xi = data::load_image_input(index, frame, ref.view);
        if (xi.dim(1) != img)
          throw DataError("train2d: image resolution does not match model");
        std::memcpy(x.ptr() + static_cast<std::int64_t>(b) * xi.size(),
                    xi.ptr(), sizeof(float) * xi.size());
        const auto ti = data::gt_heatmaps(index, frame, ref.view);
        std::memcpy(target.ptr() + static_cast<std::int64_t>(b) * ti.size(),
                    ti.ptr(), sizeof(float) * ti.size());
      }

      nn::Tape<float> tape;
      const auto bound = nn::bind_params(tape, params, true);
      const auto out =
          model::heatmap_net_forward(tape, bound, cfg.model, tape.input(x));
      const int loss = nn::mse_loss(tape, out.heatmaps, target);
      const double loss_v = tape.val(loss).data[0];
      if (!std::isfinite(loss_v))
        throw DivergenceError("train2d: non-finite loss at step " +
                              std::to_string(step));
      tape.backward(loss);
      const double lr = lr_at(step, total_steps, cfg.lr);
      adam.step(params, tape, bound, static_cast<float>(lr));

      if (step == 0) stats.first_loss = loss_v;
      stats.final_loss = loss_v;
      if (log) {
        log << nlohmann::json({{"stage", "heatmap2d"},
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

TrainStats run_train_2d(const data::DatasetIndex& index,
                        const Train2DConfig& cfg) {
  nn::ParamStore<float> params;
  {
    Rng init_rng(cfg.seed);
    model::heatmap_net_init<float>(params, cfg.model, init_rng);
  }
  const TrainStats stats = train_heatmap_net(index, cfg, params);
  if (!cfg.checkpoint_path.empty()) {
    nn::Checkpoint ckpt;
    ckpt.seed = cfg.seed;
    nlohmann::json sec_cfg = {{"model", model::config_to_json(cfg.model)},
                              {"seed", cfg.seed},
                              {"steps", stats.steps}};
    ckpt.sections["heatmap2d"] =
        nn::section_from_params(params, std::move(sec_cfg));
    nn::save_checkpoint(cfg.checkpoint_path, ckpt);
  }
  return stats;
}

}  // namespace egostereo::train
