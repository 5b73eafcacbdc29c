#pragma once

#include <string>

#include "egostereo/data/manifest.hpp"
#include "egostereo/model/config.hpp"
#include "egostereo/nn/params.hpp"

namespace egostereo::train {

struct Train2DConfig {
  model::ModelConfig model;
  int epochs = 10;
  double lr = 1e-3;
  int batch = 16;
  std::uint64_t seed = 0;
  std::string checkpoint_path;  // empty = do not save
  std::string log_path;         // JSONL step log, empty = no log
};

struct TrainStats {
  std::int64_t steps = 0;
  double first_loss = 0.0;
  double final_loss = 0.0;
};

// Trains the 2-d joint localizer from scratch on every view of every frame
// and leaves the weights in `params`. Deterministic for a fixed seed.
// Throws DivergenceError when the loss stops being finite.
TrainStats train_heatmap_net(const data::DatasetIndex& index,
                             const Train2DConfig& cfg,
                             nn::ParamStore<float>& params);

// init + train + save checkpoint (section "heatmap2d").
TrainStats run_train_2d(const data::DatasetIndex& index,
                        const Train2DConfig& cfg);

}  // namespace egostereo::train
