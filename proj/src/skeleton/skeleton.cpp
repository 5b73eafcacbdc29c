#include "egostereo/skeleton/skeleton.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "egostereo/errors.hpp"

namespace egostereo {

int SkeletonDefinition::joint_index(const std::string& name) const {
  for (int i = 0; i < joint_count(); ++i) {
    if (joint_names[i] == name) return i;
  }
  return -1;
}

const SkeletonDefinition& SkeletonDefinition::canonical() {
  static const SkeletonDefinition skel = [] {
    SkeletonDefinition s;
    s.joint_names = {
        "head",           "neck",
        "left_upper_arm", "left_lower_arm",  "left_hand",
        "left_thigh",     "left_calf",       "left_foot",  "left_ball",
        "right_upper_arm","right_lower_arm", "right_hand",
        "right_thigh",    "right_calf",      "right_foot", "right_ball",
    };
    s.bone_edges = {
        {1, 0},                      // neck - head
        {1, 2},  {2, 3},   {3, 4},   // left arm chain
        {1, 9},  {9, 10},  {10, 11}, // right arm chain
        {1, 5},  {5, 6},   {6, 7},  {7, 8},    // left leg chain
        {1, 12}, {12, 13}, {13, 14}, {14, 15}, // right leg chain
    };
    for (int j = 1; j < 16; ++j) s.heatmap_joints.push_back(j);
    s.pelvis_ref = {5, 12};
    s.validate();
    return s;
  }();
  return skel;
}

void SkeletonDefinition::validate() const {
  const int j = joint_count();
  std::ostringstream why;
  std::set<std::string> names(joint_names.begin(), joint_names.end());
  if (j < 2) {
    why << "need at least 2 joints";
  } else if (static_cast<int>(names.size()) != j) {
    why << "duplicate joint names";
  } else if (bone_count() != j - 1) {
    why << "expected " << j - 1 << " bone edges for a tree, got "
        << bone_count();
  } else {
    // Union-find over edges: a tree touches every joint with no cycles.
    std::vector<int> root(j);
    for (int i = 0; i < j; ++i) root[i] = i;
    auto find = [&](int a) {
      while (root[a] != a) a = root[a] = root[root[a]];
      return a;
    };
    for (auto [p, c] : bone_edges) {
      if (p < 0 || p >= j || c < 0 || c >= j) {
        why << "bone edge (" << p << ", " << c << ") out of range";
        break;
      }
      const int rp = find(p);
      const int rc = find(c);
      if (rp == rc) {
        why << "bone edges contain a cycle at (" << p << ", " << c << ")";
        break;
      }
      root[rp] = rc;
    }
  }
  if (why.str().empty()) {
    for (int h : heatmap_joints) {
      if (h < 0 || h >= j) {
        why << "heatmap joint " << h << " out of range";
        break;
      }
    }
  }
  if (why.str().empty() && pelvis_ref.first >= 0) {
    if (pelvis_ref.first >= j || pelvis_ref.second < 0 ||
        pelvis_ref.second >= j) {
      why << "pelvis_ref out of range";
    }
  }
  if (!why.str().empty()) {
    throw ConfigError("SkeletonDefinition: " + why.str());
  }
}

std::string skeleton_to_json(const SkeletonDefinition& skel) {
  nlohmann::json j;
  j["version"] = skel.version;
  j["joint_names"] = skel.joint_names;
  auto& edges = j["bone_edges"] = nlohmann::json::array();
  for (auto [p, c] : skel.bone_edges) edges.push_back({p, c});
  j["heatmap_joints"] = skel.heatmap_joints;
  j["pelvis_ref"] = {skel.pelvis_ref.first, skel.pelvis_ref.second};
  return j.dump(2) + "\n";
}

SkeletonDefinition skeleton_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("skeleton json: parse failure: ") + e.what());
  }
  SkeletonDefinition s;
  try {
    s.version = j.at("version").get<int>();
    s.joint_names = j.at("joint_names").get<std::vector<std::string>>();
    for (const auto& e : j.at("bone_edges")) {
      s.bone_edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    s.heatmap_joints = j.at("heatmap_joints").get<std::vector<int>>();
    s.pelvis_ref = {j.at("pelvis_ref").at(0).get<int>(),
                    j.at("pelvis_ref").at(1).get<int>()};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("skeleton json: missing/bad field: ") +
                    e.what());
  }
  s.validate();
  return s;
}

SkeletonDefinition load_skeleton_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("skeleton json: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return skeleton_from_json(text);
}

void save_skeleton_json(const std::string& path,
                        const SkeletonDefinition& skel) {
  std::ofstream out(path);
  if (!out) throw DataError("skeleton json: cannot write " + path);
  out << skeleton_to_json(skel);
}

Eigen::Matrix<double, Eigen::Dynamic, 3> bones(const SkeletonDefinition& skel,
                                               const JointMatrix& joints) {
  if (joints.rows() != skel.joint_count()) {
    throw ConfigError("bones: joint count mismatch");
  }
  Eigen::Matrix<double, Eigen::Dynamic, 3> out(skel.bone_count(), 3);
  for (int m = 0; m < skel.bone_count(); ++m) {
    const auto [p, c] = skel.bone_edges[m];
    out.row(m) = joints.row(c) - joints.row(p);
  }
  return out;
}

Eigen::Vector3d pelvis_point(const SkeletonDefinition& skel,
                             const JointMatrix& joints) {
  if (skel.pelvis_ref.first < 0) {
    throw ConfigError("pelvis_point: skeleton has no pelvis reference");
  }
  return 0.5 * (joints.row(skel.pelvis_ref.first) +
                joints.row(skel.pelvis_ref.second))
                   .transpose();
}

Pose3D to_device_frame(const Pose3D& world_pose,
                       const RigidTransform& device_from_world) {
  const RigidTransform inv = device_from_world.inverse();
  Pose3D out;
  out.frame = PoseFrame::Device;
  out.joints = world_pose.joints * inv.rotation.transpose();
  out.joints.rowwise() += inv.translation.transpose();
  return out;
}

Pose3D to_world_frame(const Pose3D& device_pose,
                      const RigidTransform& device_from_world) {
  Pose3D out;
  out.frame = PoseFrame::World;
  out.joints = device_pose.joints * device_from_world.rotation.transpose();
  out.joints.rowwise() += device_from_world.translation.transpose();
  return out;
}

Pose3D to_pelvis_relative(const SkeletonDefinition& skel, const Pose3D& pose) {
  Pose3D out;
  out.frame = PoseFrame::Pelvis;
  out.joints = pose.joints;
  out.joints.rowwise() -= pelvis_point(skel, pose.joints).transpose();
  return out;
}

}  // namespace egostereo
