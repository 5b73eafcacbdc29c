#pragma once

#include <string>
#include <utility>
#include <vector>

#include "egostereo/data/manifest.hpp"
#include "egostereo/depth/providers.hpp"
#include "egostereo/model/config.hpp"
#include "egostereo/model/pose_net.hpp"
#include "egostereo/nn/checkpoint.hpp"
#include "egostereo/nn/params.hpp"

namespace egostereo::train {

// Per-frame products of the frozen 2-d stage plus the depth observations,
// computed once so 3-d training and evaluation never touch images again.
struct FeatureCache {
  struct Entry {
    nn::Tensor<float> heatmaps[2];  // per view, (J, hm, hm)
    nn::Tensor<float> depth[2];     // per view, (2, hm, hm)
    bool depth_missing[2] = {true, true};
    nn::Tensor<float> features;     // both views, (2C, dg, dg)
  };
  std::vector<std::vector<Entry>> frames;  // [sequence][frame]
};

FeatureCache build_feature_cache(const data::DatasetIndex& index,
                                 const nn::ParamStore<float>& params2d,
                                 const model::ModelConfig& cfg,
                                 depth::DepthObservationProvider& depth_src);

// (sequence index, window of frame indices).
using WindowRef = std::pair<int, std::vector<int>>;

// Every per-frame window of every sequence, clamped at sequence start.
std::vector<WindowRef> all_windows(const data::DatasetIndex& index,
                                   const model::ModelConfig& cfg);

struct WindowBatch {
  model::PoseNetInputs<float> inputs;
  nn::Tensor<float> gt;  // (B*T*J, 3) device-frame meters
};

WindowBatch assemble_windows(const data::DatasetIndex& index,
                             const FeatureCache& cache,
                             const model::ModelConfig& cfg,
                             const std::vector<WindowRef>& windows);

struct Train3DConfig {
  model::ModelConfig model;  // geometry must match the 2-d checkpoint
  int epochs = 10;
  double lr = 2e-4;
  int batch = 32;
  std::uint64_t seed = 0;
  std::string checkpoint_path;  // empty = do not save
  std::string log_path;         // JSONL step log
};

struct Train3DStats {
  std::int64_t steps = 0;
  double first_loss = 0.0;
  double final_loss = 0.0;
};

// Trains the pose decoder against the cached stage-1 outputs. The 2-d
// weights stay frozen; only "p3.*" parameters live in `params`.
Train3DStats train_pose_net(const data::DatasetIndex& index,
                            const FeatureCache& cache,
                            const Train3DConfig& cfg,
                            nn::ParamStore<float>& params);

// Loads the frozen 2-d section, builds the cache, trains, and saves a
// checkpoint carrying both sections. Returns the trained pose parameters
// through `params_out` when non-null.
Train3DStats run_train_3d(const data::DatasetIndex& index,
                          const std::string& checkpoint_2d,
                          depth::DepthObservationProvider& depth_src,
                          const Train3DConfig& cfg,
                          nn::ParamStore<float>* params_out = nullptr);

// Rebuilds both parameter stores from a combined checkpoint. The model
// config comes from the "pose3d" section.
struct LoadedModel {
  model::ModelConfig config;
  nn::ParamStore<float> params2d;
  nn::ParamStore<float> params3d;
  std::uint64_t seed = 0;
};
LoadedModel load_combined_checkpoint(const std::string& path);

}  // namespace egostereo::train
