#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "egostereo/nn/params.hpp"

namespace egostereo::nn {

// Binary archive: 8-byte magic, little-endian u64 header length, JSON
// header, then raw float32 payload. The header stores per-section configs
// (width, stage geometry, seed, ...) and tensor shapes/offsets, so a
// checkpoint is self-describing. A file may hold several sections; the 3-d
// stage stores its own weights next to the 2-d ones it was trained against,
// which is why evaluation takes a single checkpoint path.
struct CheckpointSection {
  nlohmann::json config;
  std::map<std::string, Tensor<float>> tensors;
};

struct Checkpoint {
  std::uint64_t seed = 0;
  std::map<std::string, CheckpointSection> sections;

  bool has(const std::string& tag) const { return sections.count(tag) != 0; }
  const CheckpointSection& at(const std::string& tag) const;
};

// Writes to <path>.tmp and renames, so a crash never leaves a torn file.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

CheckpointSection section_from_params(const ParamStore<float>& ps,
                                      nlohmann::json config);
// Shapes and names must match the store exactly.
void params_from_section(const CheckpointSection& sec, ParamStore<float>& ps);

}  // namespace egostereo::nn
