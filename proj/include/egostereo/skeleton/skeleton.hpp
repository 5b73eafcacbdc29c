#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "egostereo/geometry/rigid.hpp"

namespace egostereo {

using JointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

enum class PoseFrame { World, Device, Pelvis };

// Joint layout plus the bone tree used for direction losses. The canonical
// rig has 16 joints; tests use smaller trees, so nothing here hard-codes 16.
struct SkeletonDefinition {
  std::vector<std::string> joint_names;
  // parent -> child; bone vector is child - parent.
  std::vector<std::pair<int, int>> bone_edges;
  // Joints that get a heatmap channel (the head sits behind the cameras on
  // the canonical rig and is never observed, so it is excluded there).
  std::vector<int> heatmap_joints;
  // Midpoint of these two joints acts as the pelvis reference point.
  std::pair<int, int> pelvis_ref{-1, -1};
  int version = 1;

  int joint_count() const { return static_cast<int>(joint_names.size()); }
  int bone_count() const { return static_cast<int>(bone_edges.size()); }
  int joint_index(const std::string& name) const;  // -1 when absent

  // Head-mounted stereo rig layout: head, neck, then per side (left first)
  // upper arm, lower arm, hand, thigh, calf, foot, ball of foot.
  static const SkeletonDefinition& canonical();

  // Checks name uniqueness, edge indices, and that the edges form a single
  // spanning tree. Throws ConfigError on violation.
  void validate() const;
};

// Versioned JSON document (joint_names / bone_edges / heatmap_joints /
// pelvis_ref / version).
std::string skeleton_to_json(const SkeletonDefinition& skel);
SkeletonDefinition skeleton_from_json(const std::string& text);
SkeletonDefinition load_skeleton_json(const std::string& path);
void save_skeleton_json(const std::string& path, const SkeletonDefinition& skel);

struct Pose3D {
  JointMatrix joints;  // one row per joint, meters
  PoseFrame frame = PoseFrame::Device;
};

// Bone vectors, one row per edge, child minus parent.
Eigen::Matrix<double, Eigen::Dynamic, 3> bones(const SkeletonDefinition& skel,
                                               const JointMatrix& joints);

// Midpoint of the pelvis reference joints.
Eigen::Vector3d pelvis_point(const SkeletonDefinition& skel,
                             const JointMatrix& joints);

// Frame changes. device_from_world is the device pose in the world frame
// (i.e. it maps device coordinates to world coordinates).
Pose3D to_device_frame(const Pose3D& world_pose,
                       const RigidTransform& device_from_world);
Pose3D to_world_frame(const Pose3D& device_pose,
                      const RigidTransform& device_from_world);

// Subtracts the pelvis reference point. Idempotent.
Pose3D to_pelvis_relative(const SkeletonDefinition& skel, const Pose3D& pose);

}  // namespace egostereo
