#include "egostereo/train/evaluate.hpp"

#include "egostereo/data/sample.hpp"
#include "egostereo/data/windows.hpp"

namespace egostereo::train {

EvalResult evaluate_dataset(const data::DatasetIndex& index,
                            const model::ModelConfig& cfg,
                            const WindowPredictor& predict,
                            const EvalOptions& opt) {
  cfg.validate();
  if (index.skeleton.joint_count() != cfg.joint_count)
    throw ConfigError("evaluate: skeleton joint count does not match model");

  bool do_floor = opt.floor_metric && !opt.pelvis_relative;
  std::vector<int> contact;
  if (do_floor) {
    try {
      contact = metrics::ground_contact_joints(index.skeleton);
    } catch (const ConfigError&) {
      do_floor = false;  // skeleton without feet: skip the floor metric
    }
  }
  const double floor_y = index.room ? index.room->min_corner.y() : 0.0;

  metrics::MetricAccumulator acc;
  EvalResult result;
  for (int s = 0; s < static_cast<int>(index.sequences.size()); ++s) {
    const auto& seq = index.sequences[s];
    const auto windows = data::sample_windows(
        static_cast<int>(seq.frames.size()), cfg.t_window, cfg.skip);
    const auto preds = predict(s, windows);
    if (preds.size() != windows.size())
      throw ShapeError("evaluate: predictor returned wrong window count");

    SequenceCurve curve;
    curve.id = seq.id;
    curve.category = seq.category;
    curve.mpjpe_mm.reserve(seq.frames.size());
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
      const auto& frame = seq.frames[f];
      JointMatrix pred = preds[f];
      JointMatrix gt = data::gt_pose_device(frame);
      if (pred.rows() != gt.rows())
        throw ShapeError("evaluate: predictor joint count mismatch");

      if (do_floor) {
        JointMatrix world(pred.rows(), 3);
        for (Eigen::Index j = 0; j < pred.rows(); ++j)
          world.row(j) = frame.device_from_world
                             .apply(pred.row(j).transpose())
                             .transpose();
        acc.add_floor(seq.category, metrics::floor_penetration_mm(
                                        world, contact, floor_y));
      }
      if (opt.pelvis_relative) {
        pred = to_pelvis_relative(index.skeleton,
                                  {pred, PoseFrame::Device})
                   .joints;
        gt = to_pelvis_relative(index.skeleton, {gt, PoseFrame::Device})
                 .joints;
      }
      acc.add(seq.category, pred, gt);
      curve.mpjpe_mm.push_back(metrics::mpjpe_mm(pred, gt));
    }
    result.curves.push_back(std::move(curve));
  }
  result.report = acc.report();
  return result;
}

WindowPredictor make_model_predictor(const data::DatasetIndex& index,
                                     const FeatureCache& cache,
                                     const nn::ParamStore<float>& params3d,
                                     const model::ModelConfig& cfg,
                                     int batch) {
  if (batch < 1) throw ConfigError("evaluate: batch must be >= 1");
  return [&index, &cache, &params3d, cfg,
          batch](int s, const std::vector<std::vector<int>>& windows) {
    const int T = cfg.t_window;
    const int J = cfg.joint_count;
    std::vector<JointMatrix> out;
    out.reserve(windows.size());
    for (std::size_t pos = 0; pos < windows.size();
         pos += static_cast<std::size_t>(batch)) {
      const std::size_t bsz =
          std::min<std::size_t>(batch, windows.size() - pos);
      std::vector<WindowRef> refs;
      refs.reserve(bsz);
      for (std::size_t i = 0; i < bsz; ++i)
        refs.emplace_back(s, windows[pos + i]);
      const WindowBatch wb = assemble_windows(index, cache, cfg, refs);

      nn::Tape<float> t;
      const auto bound = nn::bind_params(t, params3d, false);
      const auto net = model::pose_net_forward(t, bound, cfg, wb.inputs);
      const auto& pv = t.val(net.pred);
      for (std::size_t b = 0; b < bsz; ++b) {
        JointMatrix m(J, 3);
        const std::int64_t base =
            (static_cast<std::int64_t>(b) * T + (T - 1)) * J;
        for (int j = 0; j < J; ++j)
          for (int c = 0; c < 3; ++c)
            m(j, c) = static_cast<double>(
                pv.mat2d()(base + j, c));
        out.push_back(std::move(m));
      }
    }
    return out;
  };
}

WindowPredictor make_oracle_predictor(const data::DatasetIndex& index) {
  return [&index](int s, const std::vector<std::vector<int>>& windows) {
    std::vector<JointMatrix> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
      const auto& frame = index.sequences[s].frames[w.back()];
      out.push_back(data::gt_pose_device(frame));
    }
    return out;
  };
}

nlohmann::json eval_to_json(const EvalResult& result) {
  nlohmann::json curves = nlohmann::json::array();
  for (const auto& c : result.curves)
    curves.push_back({{"id", c.id},
                      {"category", c.category},
                      {"mpjpe_mm", c.mpjpe_mm}});
  return {{"report", metrics::report_to_json(result.report)},
          {"curves", curves}};
}

}  // namespace egostereo::train
