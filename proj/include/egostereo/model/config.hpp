#pragma once

#include <nlohmann/json.hpp>

#include "egostereo/errors.hpp"

namespace egostereo::model {

// Geometry of both network stages. `width` is the top encoder channel
// count; every other layer width derives from it so one knob scales the
// whole model. Stored inside checkpoints so evaluation can rebuild the
// exact architecture.
struct ModelConfig {
  int width = 512;         // encoder channels at the bottleneck
  int image_size = 256;    // square input resolution
  int heatmap_joints = 15;
  int joint_count = 16;
  int t_window = 5;        // frames per temporal window
  int skip = 3;            // frame stride inside a window
  int heads = 8;
  int decoder_layers = 6;
  double lambda_pose = 0.1;
  double lambda_cos = 0.01;
  // Ablations. use_depth drops the scene-depth tokens from the decoder
  // memory entirely; use_padding_mask replaces the -inf attention bias for
  // missing depth with 0 (the network then attends to zero-filled tokens).
  bool use_depth = true;
  bool use_padding_mask = true;

  int hidden() const { return width / 2; }    // transformer token width
  int mlp_dim() const { return 2 * width; }   // decoder FFN inner width
  int heatmap_size() const { return image_size / 4; }
  int hm_grid() const { return image_size / 16; }     // heatmap token grid
  int depth_grid() const { return image_size / 32; }  // depth token grid
  int queries() const { return t_window * joint_count; }
  int tokens_per_view_frame() const {
    return hm_grid() * hm_grid() +
           (use_depth ? depth_grid() * depth_grid() : 0);
  }
  int memory_tokens() const {
    return t_window * 2 * tokens_per_view_frame();
  }

  void validate() const {
    if (width < 16 || width % 16 != 0)
      throw ConfigError("ModelConfig: width must be a positive multiple of 16");
    if (image_size < 32 || image_size % 32 != 0)
      throw ConfigError("ModelConfig: image_size must be a multiple of 32");
    if (heatmap_joints < 1 || joint_count < 2)
      throw ConfigError("ModelConfig: joint counts out of range");
    if (t_window < 2 || skip < 1)
      throw ConfigError("ModelConfig: need t_window >= 2 and skip >= 1");
    if (heads < 1 || hidden() % heads != 0)
      throw ConfigError("ModelConfig: heads must divide width/2");
    if (hidden() % 4 != 0)
      throw ConfigError("ModelConfig: width/2 must be divisible by 4");
    if (decoder_layers < 1)
      throw ConfigError("ModelConfig: decoder_layers < 1");
    if (lambda_pose <= 0.0 || lambda_cos < 0.0)
      throw ConfigError("ModelConfig: bad loss weights");
  }
};

inline nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"width", c.width},
          {"image_size", c.image_size},
          {"heatmap_joints", c.heatmap_joints},
          {"joint_count", c.joint_count},
          {"t_window", c.t_window},
          {"skip", c.skip},
          {"heads", c.heads},
          {"decoder_layers", c.decoder_layers},
          {"lambda_pose", c.lambda_pose},
          {"lambda_cos", c.lambda_cos},
          {"use_depth", c.use_depth},
          {"use_padding_mask", c.use_padding_mask}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.width = j.at("width").get<int>();
    c.image_size = j.at("image_size").get<int>();
    c.heatmap_joints = j.at("heatmap_joints").get<int>();
    c.joint_count = j.at("joint_count").get<int>();
    c.t_window = j.at("t_window").get<int>();
    c.skip = j.at("skip").get<int>();
    c.heads = j.at("heads").get<int>();
    c.decoder_layers = j.at("decoder_layers").get<int>();
    c.lambda_pose = j.at("lambda_pose").get<double>();
    c.lambda_cos = j.at("lambda_cos").get<double>();
    c.use_depth = j.at("use_depth").get<bool>();
    c.use_padding_mask = j.at("use_padding_mask").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace egostereo::model
