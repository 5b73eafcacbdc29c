#include "egostereo/data/manifest.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "egostereo/errors.hpp"

namespace egostereo::data {

namespace {

using nlohmann::json;

json rigid_to_json(const RigidTransform& t) {
  json j;
  auto& r = j["rotation"] = json::array();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r.push_back(t.rotation(i, k));
  j["translation"] = {t.translation.x(), t.translation.y(),
                      t.translation.z()};
  return j;
}

RigidTransform rigid_from_json(const json& j) {
  RigidTransform t;
  const auto& r = j.at("rotation");
  if (r.size() != 9) throw DataError("manifest: rotation needs 9 entries");
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) t.rotation(i, k) = r.at(i * 3 + k).get<double>();
  const auto& tr = j.at("translation");
  for (int i = 0; i < 3; ++i) t.translation[i] = tr.at(i).get<double>();
  t.validate();
  return t;
}

json joints2d_to_json(const Joints2D& j2d) {
  json arr = json::array();
  for (int i = 0; i < j2d.count(); ++i) {
    if (j2d.visible[i]) {
      arr.push_back({j2d.px(i, 0), j2d.px(i, 1)});
    } else {
      arr.push_back(nullptr);
    }
  }
  return arr;
}

Joints2D joints2d_from_json(const json& arr, int expect) {
  if (static_cast<int>(arr.size()) != expect) {
    throw DataError("manifest: joints2d entry count mismatch");
  }
  Joints2D out;
  out.px.resize(expect, 2);
  out.px.setZero();
  out.visible.assign(expect, 0);
  for (int i = 0; i < expect; ++i) {
    if (arr.at(i).is_null()) continue;
    out.px(i, 0) = arr.at(i).at(0).get<double>();
    out.px(i, 1) = arr.at(i).at(1).get<double>();
    out.visible[i] = 1;
  }
  return out;
}

}  // namespace

int DatasetIndex::total_frames() const {
  int n = 0;
  for (const auto& s : sequences) n += static_cast<int>(s.frames.size());
  return n;
}

const SequenceRecord& DatasetIndex::sequence(const std::string& id) const {
  for (const auto& s : sequences) {
    if (s.id == id) return s;
  }
  throw DataError("dataset: no sequence named " + id);
}

RigidTransform camera_to_world(const DatasetIndex& index,
                               const FrameRecord& frame, int view) {
  return frame.device_from_world * index.rig.rig.cam_to_device(view);
}

DatasetIndex load_dataset(const std::string& dir) {
  const std::filesystem::path root(dir);
  const auto manifest_path = root / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) {
    throw DataError("dataset: cannot open " + manifest_path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(std::string("dataset: manifest parse failure: ") +
                    e.what());
  }

  DatasetIndex index;
  index.root = root;
  try {
    index.rig = rig_from_json(j.at("camera").dump());
    index.skeleton = skeleton_from_json(j.at("skeleton").dump());
    if (j.contains("room")) {
      depth::RoomBox room;
      for (int i = 0; i < 3; ++i) {
        room.min_corner[i] = j.at("room").at("min").at(i).get<double>();
        room.max_corner[i] = j.at("room").at("max").at(i).get<double>();
      }
      room.validate();
      index.room = room;
    }
    const int hm_joints = static_cast<int>(index.skeleton.heatmap_joints.size());
    for (const auto& js : j.at("sequences")) {
      SequenceRecord seq;
      seq.id = js.at("id").get<std::string>();
      seq.fps = js.at("fps").get<double>();
      if (js.contains("category")) {
        seq.category = js.at("category").get<std::string>();
      }
      if (!(seq.fps > 0.0)) {
        throw DataError("dataset: sequence " + seq.id + " has fps <= 0");
      }
      for (const auto& jf : js.at("frames")) {
        FrameRecord f;
        f.idx = jf.at("idx").get<int>();
        f.img[0] = jf.at("img_l").get<std::string>();
        f.img[1] = jf.at("img_r").get<std::string>();
        f.depth[0] = jf.at("depth_l").get<std::string>();
        f.depth[1] = jf.at("depth_r").get<std::string>();
        f.depth_available = jf.at("depth_available").get<bool>();
        const auto& pose = jf.at("pose");
        if (static_cast<int>(pose.size()) != index.skeleton.joint_count()) {
          throw DataError("dataset: sequence " + seq.id + " frame " +
                          std::to_string(f.idx) + " pose has " +
                          std::to_string(pose.size()) + " joints");
        }
        f.pose_world.resize(index.skeleton.joint_count(), 3);
        for (int r = 0; r < f.pose_world.rows(); ++r) {
          for (int c = 0; c < 3; ++c) {
            f.pose_world(r, c) = pose.at(r).at(c).get<double>();
          }
        }
        f.device_from_world = rigid_from_json(jf.at("device_frame"));
        f.joints2d[0] = joints2d_from_json(jf.at("joints2d_l"), hm_joints);
        f.joints2d[1] = joints2d_from_json(jf.at("joints2d_r"), hm_joints);
        seq.frames.push_back(std::move(f));
      }
      index.sequences.push_back(std::move(seq));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("dataset: manifest missing/bad field: ") +
                    e.what());
  }

  // Itemized existence check over every referenced file.
  std::vector<std::string> missing;
  for (const auto& s : index.sequences) {
    for (const auto& f : s.frames) {
      for (int v = 0; v < 2; ++v) {
        if (!std::filesystem::exists(root / f.img[v])) {
          missing.push_back(f.img[v]);
        }
        if (!std::filesystem::exists(root / f.depth[v])) {
          missing.push_back(f.depth[v]);
        }
      }
    }
  }
  if (!missing.empty()) {
    std::ostringstream os;
    os << "dataset: " << missing.size() << " referenced file(s) missing:";
    const std::size_t show = std::min<std::size_t>(missing.size(), 20);
    for (std::size_t i = 0; i < show; ++i) os << "\n  " << missing[i];
    if (missing.size() > show) {
      os << "\n  ... and " << missing.size() - show << " more";
    }
    throw DataError(os.str());
  }
  return index;
}

void save_manifest(const DatasetIndex& index) {
  json j;
  j["camera"] = json::parse(rig_to_json(index.rig));
  j["skeleton"] = json::parse(skeleton_to_json(index.skeleton));
  if (index.room) {
    j["room"]["min"] = {index.room->min_corner.x(), index.room->min_corner.y(),
                        index.room->min_corner.z()};
    j["room"]["max"] = {index.room->max_corner.x(), index.room->max_corner.y(),
                        index.room->max_corner.z()};
  }
  auto& seqs = j["sequences"] = json::array();
  for (const auto& s : index.sequences) {
    json js;
    js["id"] = s.id;
    js["fps"] = s.fps;
    js["category"] = s.category;
    auto& frames = js["frames"] = json::array();
    for (const auto& f : s.frames) {
      json jf;
      jf["idx"] = f.idx;
      jf["img_l"] = f.img[0];
      jf["img_r"] = f.img[1];
      jf["depth_l"] = f.depth[0];
      jf["depth_r"] = f.depth[1];
      jf["depth_available"] = f.depth_available;
      auto& pose = jf["pose"] = json::array();
      for (int r = 0; r < f.pose_world.rows(); ++r) {
        pose.push_back(
            {f.pose_world(r, 0), f.pose_world(r, 1), f.pose_world(r, 2)});
      }
      jf["device_frame"] = rigid_to_json(f.device_from_world);
      jf["joints2d_l"] = joints2d_to_json(f.joints2d[0]);
      jf["joints2d_r"] = joints2d_to_json(f.joints2d[1]);
      frames.push_back(std::move(jf));
    }
    seqs.push_back(std::move(js));
  }
  std::ofstream out(index.root / "manifest.json");
  if (!out) {
    throw DataError("dataset: cannot write manifest under " +
                    index.root.string());
  }
  out << j.dump(1) << "\n";
}

}  // namespace egostereo::data
