#pragma once

#include <cstdint>
#include <string>

#include "egostereo/data/manifest.hpp"

namespace egostereo::data {

// Analytic motion-capture stand-in: a capsule person in a checkered room,
// rendered through the stereo fisheye rig. Every quantity derives from the
// seed through closed-form kinematics, so reruns of the same binary produce
// byte-identical datasets.
struct SyntheticConfig {
  std::string out_dir;
  std::uint64_t seed = 1;
  int sequences = 4;
  int frames_per_sequence = 100;
  double fps = 25.0;
  int image_size = 256;
  double fov_deg = 170.0;
  // Per-frame probability that the depth sensor dropped out (both views).
  double depth_dropout = 0.3;
  // Also write full-resolution silhouette PNGs under masks/ so the
  // disk-backed mask provider has something to read.
  bool write_masks = true;

  void validate() const;
};

// Sequences cycle through these motion styles; the style doubles as the
// manifest category so evaluation can aggregate per motion.
extern const char* const kSyntheticCategories[4];  // walk, wave, squat, sway

// Writes rgb/, depth/, masks/ and manifest.json under out_dir and returns
// the same index that load_dataset(out_dir) would produce.
DatasetIndex generate_synthetic_dataset(const SyntheticConfig& cfg);

}  // namespace egostereo::data
