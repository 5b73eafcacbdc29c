#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "egostereo/metrics/metrics.hpp"
#include "egostereo/train/train3d.hpp"

namespace egostereo::train {

// Returns one device-frame pose (J, 3) per window: the prediction for the
// window's last frame. Called once per sequence with every window, so
// implementations may batch freely.
using WindowPredictor = std::function<std::vector<JointMatrix>(
    int seq_index, const std::vector<std::vector<int>>& windows)>;

struct EvalOptions {
  // Compare poses after subtracting the pelvis reference point instead of
  // raw device coordinates.
  bool pelvis_relative = false;
  // Floor-penetration metric from world-frame reconstructions (device mode
  // only; needs a dataset with room geometry and foot joints).
  bool floor_metric = true;
};

struct SequenceCurve {
  std::string id;
  std::string category;
  std::vector<double> mpjpe_mm;  // one value per frame
};

struct EvalResult {
  metrics::MetricReport report;
  std::vector<SequenceCurve> curves;
};

EvalResult evaluate_dataset(const data::DatasetIndex& index,
                            const model::ModelConfig& cfg,
                            const WindowPredictor& predict,
                            const EvalOptions& opt = {});

// Runs the trained decoder over cached features, `batch` windows at a
// time. Captures the arguments by reference; they must outlive the
// returned functor.
WindowPredictor make_model_predictor(const data::DatasetIndex& index,
                                     const FeatureCache& cache,
                                     const nn::ParamStore<float>& params3d,
                                     const model::ModelConfig& cfg,
                                     int batch = 8);

// Echoes the ground truth of each window's last frame. Validates the
// evaluation plumbing: every error metric must report zero.
WindowPredictor make_oracle_predictor(const data::DatasetIndex& index);

nlohmann::json eval_to_json(const EvalResult& result);

}  // namespace egostereo::train
