// Command-line entry point: dataset synthesis, two-stage training,
// evaluation, plotting, and artifact inspection.
//
// Exit codes: 0 success, 2 configuration/usage error, 3 data error,
// 4 training divergence.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "egostereo/data/synthetic.hpp"
#include "egostereo/depth/providers.hpp"
#include "egostereo/plot/plot.hpp"
#include "egostereo/train/evaluate.hpp"
#include "egostereo/train/train2d.hpp"
#include "egostereo/train/train3d.hpp"

using namespace egostereo;

namespace {

// Geometry that must agree with the dataset (image size, joint layout).
model::ModelConfig model_for_dataset(const data::DatasetIndex& index,
                                     int width) {
  const auto& cam = index.rig.camera;
  if (cam.width != cam.height)
    throw ConfigError("model: dataset images must be square");
  model::ModelConfig cfg;
  cfg.width = width;
  cfg.image_size = cam.width;
  cfg.heatmap_joints = static_cast<int>(index.skeleton.heatmap_joints.size());
  cfg.joint_count = index.skeleton.joint_count();
  return cfg;
}

int cmd_synth(const data::SyntheticConfig& cfg) {
  const data::DatasetIndex index = data::generate_synthetic_dataset(cfg);
  std::printf("wrote %zu sequences / %d frames to %s\n",
              index.sequences.size(), index.total_frames(),
              index.root.string().c_str());
  return 0;
}

struct Train2DArgs {
  std::string data, out, log;
  std::uint64_t seed = 0;
  int epochs = 10, batch = 16, width = 512;
  double lr = 1e-3;
};

int cmd_train_2d(const Train2DArgs& a) {
  const data::DatasetIndex index = data::load_dataset(a.data);
  train::Train2DConfig cfg;
  cfg.model = model_for_dataset(index, a.width);
  cfg.epochs = a.epochs;
  cfg.batch = a.batch;
  cfg.lr = a.lr;
  cfg.seed = a.seed;
  cfg.checkpoint_path = a.out;
  cfg.log_path = a.log;
  const auto stats = train::run_train_2d(index, cfg);
  std::printf("trained %lld steps, loss %.6f -> %.6f, saved %s\n",
              static_cast<long long>(stats.steps), stats.first_loss,
              stats.final_loss, a.out.c_str());
  return 0;
}

struct Train3DArgs {
  std::string data, ckpt2d, out, log;
  std::string depth_provider = "disk";
  std::uint64_t seed = 0;
  int epochs = 10, batch = 32, t_window = 5, skip = 3;
  int heads = 0, layers = 0;  // 0 = keep the stage-1 checkpoint's value
  double lr = 2e-4, lambda_pose = 0.1, lambda_cos = 0.01;
  bool no_depth = false, no_padding_mask = false;
};

int cmd_train_3d(const Train3DArgs& a) {
  const data::DatasetIndex index = data::load_dataset(a.data);
  const nn::Checkpoint ck2d = nn::load_checkpoint(a.ckpt2d);
  model::ModelConfig cfg =
      model::config_from_json(ck2d.at("heatmap2d").config.at("model"));
  cfg.t_window = a.t_window;
  cfg.skip = a.skip;
  cfg.lambda_pose = a.lambda_pose;
  cfg.lambda_cos = a.lambda_cos;
  cfg.use_depth = !a.no_depth;
  cfg.use_padding_mask = !a.no_padding_mask;
  if (a.heads > 0) cfg.heads = a.heads;
  if (a.layers > 0) cfg.decoder_layers = a.layers;

  auto depth_src = depth::make_depth_provider(a.depth_provider);
  train::Train3DConfig tcfg;
  tcfg.model = cfg;
  tcfg.epochs = a.epochs;
  tcfg.batch = a.batch;
  tcfg.lr = a.lr;
  tcfg.seed = a.seed;
  tcfg.checkpoint_path = a.out;
  tcfg.log_path = a.log;
  const auto stats = train::run_train_3d(index, a.ckpt2d, *depth_src, tcfg);
  std::printf("trained %lld steps, loss %.4f -> %.4f, saved %s\n",
              static_cast<long long>(stats.steps), stats.first_loss,
              stats.final_loss, a.out.c_str());
  return 0;
}

struct EvalArgs {
  std::string data, ckpt, json;
  std::string depth_provider = "disk";
  bool pelvis = false, no_floor = false;
  int batch = 8;
};

int cmd_eval(const EvalArgs& a) {
  const data::DatasetIndex index = data::load_dataset(a.data);
  const train::LoadedModel loaded = train::load_combined_checkpoint(a.ckpt);
  auto depth_src = depth::make_depth_provider(a.depth_provider);
  const train::FeatureCache cache = train::build_feature_cache(
      index, loaded.params2d, loaded.config, *depth_src);
  const auto predictor = train::make_model_predictor(
      index, cache, loaded.params3d, loaded.config, a.batch);
  train::EvalOptions opt;
  opt.pelvis_relative = a.pelvis;
  opt.floor_metric = !a.no_floor;
  const train::EvalResult result =
      train::evaluate_dataset(index, loaded.config, predictor, opt);
  std::fputs(metrics::format_report(result.report).c_str(), stdout);
  if (!a.json.empty()) {
    std::ofstream out(a.json, std::ios::trunc);
    if (!out) throw DataError("eval: cannot write " + a.json);
    out << train::eval_to_json(result).dump(2) << "\n";
    std::printf("wrote %s\n", a.json.c_str());
  }
  return 0;
}

struct PlotArgs {
  std::string in, out;
  std::string title = "pose error per frame";
  int width = 960, height = 540;
};

int cmd_plot(const PlotArgs& a) {
  std::ifstream in(a.in);
  if (!in) throw DataError("plot: cannot read " + a.in);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("plot: bad JSON: ") + e.what());
  }
  std::vector<plot::Series> series;
  try {
    for (const auto& c : j.at("curves"))
      series.push_back({c.at("id").get<std::string>(),
                        c.at("mpjpe_mm").get<std::vector<double>>()});
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("plot: unexpected layout: ") + e.what());
  }
  plot::CurvePlotOptions opt;
  opt.title = a.title;
  opt.width = a.width;
  opt.height = a.height;
  plot::save_curve_png(a.out, series, opt);
  std::printf("wrote %s\n", a.out.c_str());
  return 0;
}

struct InspectArgs {
  std::string ckpt, data;
};

int cmd_inspect(const InspectArgs& a) {
  if (a.ckpt.empty() && a.data.empty())
    throw ConfigError("inspect: pass --ckpt and/or --data");
  if (!a.ckpt.empty()) {
    const nn::Checkpoint ck = nn::load_checkpoint(a.ckpt);
    std::printf("checkpoint %s (seed %llu)\n", a.ckpt.c_str(),
                static_cast<unsigned long long>(ck.seed));
    for (const auto& [tag, sec] : ck.sections) {
      std::int64_t params = 0;
      for (const auto& [name, t] : sec.tensors) params += t.size();
      std::printf("  section %-10s %6zu tensors %10lld parameters\n",
                  tag.c_str(), sec.tensors.size(),
                  static_cast<long long>(params));
      std::printf("    config: %s\n", sec.config.dump().c_str());
    }
  }
  if (!a.data.empty()) {
    const data::DatasetIndex index = data::load_dataset(a.data);
    std::printf("dataset %s: %zu sequences, %d frames, image %dx%d\n",
                index.root.string().c_str(), index.sequences.size(),
                index.total_frames(), index.rig.camera.width,
                index.rig.camera.height);
    for (const auto& seq : index.sequences) {
      int with_depth = 0;
      for (const auto& f : seq.frames) with_depth += f.depth_available;
      std::printf("  %-12s %-8s %4zu frames, depth on %d/%zu\n",
                  seq.id.c_str(), seq.category.c_str(), seq.frames.size(),
                  with_depth, seq.frames.size());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "egostereo: stereo egocentric 3-d pose estimation on fisheye video"};
  app.require_subcommand(1);

  data::SyntheticConfig scfg;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--out", scfg.out_dir, "output directory")->required();
  synth->add_option("--seed", scfg.seed, "base RNG seed");
  synth->add_option("--sequences", scfg.sequences, "sequence count");
  synth->add_option("--frames", scfg.frames_per_sequence,
                    "frames per sequence");
  synth->add_option("--fps", scfg.fps, "frame rate");
  synth->add_option("--image-size", scfg.image_size, "square image size");
  synth->add_option("--fov", scfg.fov_deg, "fisheye field of view, degrees");
  synth->add_option("--depth-dropout", scfg.depth_dropout,
                    "fraction of frames without depth");

  Train2DArgs t2;
  auto* train2d =
      app.add_subcommand("train-2d", "train the 2-d joint localizer");
  train2d->add_option("--data", t2.data, "dataset directory")->required();
  train2d->add_option("--out", t2.out, "checkpoint path")->required();
  train2d->add_option("--seed", t2.seed, "training seed")->required();
  train2d->add_option("--epochs", t2.epochs, "epochs");
  train2d->add_option("--lr", t2.lr, "peak learning rate");
  train2d->add_option("--batch", t2.batch, "batch size");
  train2d->add_option("--width", t2.width, "encoder channel width");
  train2d->add_option("--log", t2.log, "JSONL step log path");

  Train3DArgs t3;
  auto* train3d =
      app.add_subcommand("train-3d", "train the temporal pose decoder");
  train3d->add_option("--data", t3.data, "dataset directory")->required();
  train3d->add_option("--ckpt2d", t3.ckpt2d, "stage-1 checkpoint")
      ->required();
  train3d->add_option("--out", t3.out, "combined checkpoint path")
      ->required();
  train3d->add_option("--seed", t3.seed, "training seed")->required();
  train3d->add_option("--epochs", t3.epochs, "epochs");
  train3d->add_option("--lr", t3.lr, "peak learning rate");
  train3d->add_option("--batch", t3.batch, "batch size");
  train3d->add_option("--T", t3.t_window, "frames per window");
  train3d->add_option("--skip", t3.skip, "frame stride inside a window");
  train3d->add_option("--heads", t3.heads, "attention heads (0 = keep)");
  train3d->add_option("--layers", t3.layers, "decoder layers (0 = keep)");
  train3d->add_option("--lambda-pose", t3.lambda_pose, "pose loss weight");
  train3d->add_option("--lambda-cos", t3.lambda_cos,
                      "bone direction loss weight");
  train3d->add_option("--depth-provider", t3.depth_provider,
                      "disk | oracle | none");
  train3d->add_flag("--no-depth", t3.no_depth,
                    "ablation: drop depth tokens entirely");
  train3d->add_flag("--no-padding-mask", t3.no_padding_mask,
                    "ablation: attend to zero-filled missing depth");
  train3d->add_option("--log", t3.log, "JSONL step log path");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "evaluate a combined checkpoint");
  eval->add_option("--data", ev.data, "dataset directory")->required();
  eval->add_option("--ckpt", ev.ckpt, "combined checkpoint")->required();
  eval->add_option("--json", ev.json, "write metrics + curves JSON here");
  eval->add_option("--depth-provider", ev.depth_provider,
                   "disk | oracle | none");
  eval->add_option("--batch", ev.batch, "evaluation batch size");
  eval->add_flag("--pelvis", ev.pelvis, "pelvis-relative comparison");
  eval->add_flag("--no-floor", ev.no_floor, "skip the floor metric");

  PlotArgs pl;
  auto* plotc =
      app.add_subcommand("plot", "render per-frame error curves to PNG");
  plotc->add_option("--in", pl.in, "eval JSON (from eval --json)")
      ->required();
  plotc->add_option("--out", pl.out, "output PNG path")->required();
  plotc->add_option("--title", pl.title, "chart title");
  plotc->add_option("--plot-width", pl.width, "canvas width");
  plotc->add_option("--plot-height", pl.height, "canvas height");

  InspectArgs ins;
  auto* inspect =
      app.add_subcommand("inspect", "describe checkpoints or datasets");
  inspect->add_option("--ckpt", ins.ckpt, "checkpoint path");
  inspect->add_option("--data", ins.data, "dataset directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(synth)) return cmd_synth(scfg);
    if (app.got_subcommand(train2d)) return cmd_train_2d(t2);
    if (app.got_subcommand(train3d)) return cmd_train_3d(t3);
    if (app.got_subcommand(eval)) return cmd_eval(ev);
    if (app.got_subcommand(plotc)) return cmd_plot(pl);
    if (app.got_subcommand(inspect)) return cmd_inspect(ins);
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
