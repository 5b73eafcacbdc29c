#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "egostereo/data/heatmap_target.hpp"
#include "egostereo/depth/raycast.hpp"
#include "egostereo/geometry/camera_json.hpp"
#include "egostereo/skeleton/skeleton.hpp"

namespace egostereo::data {

// One captured stereo frame. Poses are stored inline in the manifest as
// JSON arrays (world frame, meters, canonical joint order); images and
// depth maps are referenced by path relative to the dataset root.
struct FrameRecord {
  int idx = 0;
  std::string img[2];    // left, right
  std::string depth[2];  // quarter-resolution 16-bit PNGs, 1 mm units
  bool depth_available = true;
  JointMatrix pose_world;
  RigidTransform device_from_world;
  Joints2D joints2d[2];  // rows follow skeleton.heatmap_joints
};

struct SequenceRecord {
  std::string id;
  double fps = 25.0;
  std::string category = "uncategorized";
  std::vector<FrameRecord> frames;
};

struct DatasetIndex {
  std::filesystem::path root;
  RigDescription rig;
  SkeletonDefinition skeleton;
  // Present for synthetic data; enables the geometric depth/mask oracles.
  std::optional<depth::RoomBox> room;
  std::vector<SequenceRecord> sequences;

  std::string resolve(const std::string& rel) const {
    return (root / rel).string();
  }
  int total_frames() const;
  const SequenceRecord& sequence(const std::string& id) const;
};

// Reads <dir>/manifest.json, validates structure and referenced files.
// Missing files produce one DataError itemizing every offending path.
DatasetIndex load_dataset(const std::string& dir);

// Serialization used by the synthetic generator.
void save_manifest(const DatasetIndex& index);

// Camera pose (camera -> world) of one view of one frame.
RigidTransform camera_to_world(const DatasetIndex& index,
                               const FrameRecord& frame, int view);

}  // namespace egostereo::data
