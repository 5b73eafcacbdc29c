#include "egostereo/data/synthetic.hpp"

#include <cmath>
#include <filesystem>

#include <Eigen/Geometry>

#include "egostereo/depth/observation.hpp"
#include "egostereo/depth/raycast.hpp"
#include "egostereo/errors.hpp"
#include "egostereo/io/png_io.hpp"
#include "egostereo/rng.hpp"

namespace egostereo::data {

const char* const kSyntheticCategories[4] = {"walk", "wave", "squat", "sway"};

void SyntheticConfig::validate() const {
  if (out_dir.empty()) throw ConfigError("synthetic: out_dir is empty");
  if (sequences < 1) throw ConfigError("synthetic: sequences < 1");
  if (frames_per_sequence < 1) throw ConfigError("synthetic: frames < 1");
  if (!(fps > 0.0)) throw ConfigError("synthetic: fps <= 0");
  if (image_size < 32 || image_size % 4 != 0)
    throw ConfigError("synthetic: image_size must be >= 32 and divisible by 4");
  if (!(fov_deg > 0.0 && fov_deg < 180.0))
    throw ConfigError("synthetic: fov_deg outside (0, 180)");
  if (depth_dropout < 0.0 || depth_dropout > 1.0)
    throw ConfigError("synthetic: depth_dropout outside [0, 1]");
}

namespace {

constexpr double kTau = 6.283185307179586;

Eigen::Matrix3d rot_x(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitX()).toRotationMatrix();
}
Eigen::Matrix3d rot_y(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitY()).toRotationMatrix();
}
Eigen::Matrix3d rot_z(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

double deg(double d) { return d * kTau / 360.0; }

// Everything a sequence's motion needs, drawn once per sequence so frames
// are pure functions of time.
struct MotionParams {
  int category = 0;  // index into kSyntheticCategories
  Eigen::Vector2d center{0, 0}, amp{0, 0}, freq{0, 0}, phase{0, 0};  // x, z
  double yaw0 = 0, yaw_amp = 0, yaw_freq = 0, yaw_phase = 0;
  double head_turn_amp = 0, head_freq = 0, head_phase = 0;
  double tilt0 = deg(50), nod_amp = 0, nod_freq = 0, nod_phase = 0;
  double bob_amp = 0, bob_freq = 0;
  double arm_amp = 0, arm_freq = 0, arm_phase = 0, elbow_amp = 0;
  double leg_amp = 0, knee_amp = 0;
  double raise0 = 0, raise_amp = 0, raise_freq = 0;  // wave: left shoulder
  double squat_depth = 0, squat_freq = 0;
};

MotionParams draw_params(int category, Rng& rng) {
  MotionParams p;
  p.category = category;
  p.center.x() = rng.uniform(-0.5, 0.5);
  p.center.y() = rng.uniform(-0.7, 0.7);
  p.phase = {rng.uniform(-kTau / 2, kTau / 2),
             rng.uniform(-kTau / 2, kTau / 2)};
  p.yaw0 = rng.uniform(-kTau / 2, kTau / 2);
  p.yaw_phase = rng.uniform(-kTau / 2, kTau / 2);
  p.head_phase = rng.uniform(-kTau / 2, kTau / 2);
  p.head_turn_amp = deg(rng.uniform(5, 15));
  p.head_freq = rng.uniform(0.2, 0.5);
  p.nod_phase = rng.uniform(-kTau / 2, kTau / 2);
  p.nod_amp = deg(rng.uniform(2, 6));
  p.nod_freq = rng.uniform(0.2, 0.5);
  p.arm_phase = rng.uniform(-kTau / 2, kTau / 2);
  switch (category) {
    case 0:  // walk: the root actually travels, limbs swing
      p.amp = {rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.8)};
      p.freq = {rng.uniform(0.15, 0.3), rng.uniform(0.15, 0.3)};
      p.yaw_amp = deg(rng.uniform(20, 50));
      p.yaw_freq = rng.uniform(0.08, 0.2);
      p.arm_amp = deg(rng.uniform(20, 35));
      p.arm_freq = rng.uniform(0.8, 1.2);
      p.elbow_amp = deg(rng.uniform(10, 20));
      p.leg_amp = deg(rng.uniform(15, 28));
      p.knee_amp = deg(rng.uniform(20, 40));
      p.bob_amp = rng.uniform(0.008, 0.015);
      p.bob_freq = 2.0 * p.arm_freq;
      break;
    case 1:  // wave: left arm raised and waving, root almost still
      p.amp = {rng.uniform(0.02, 0.08), rng.uniform(0.02, 0.08)};
      p.freq = {rng.uniform(0.05, 0.15), rng.uniform(0.05, 0.15)};
      p.yaw_amp = deg(rng.uniform(3, 10));
      p.yaw_freq = rng.uniform(0.05, 0.15);
      p.arm_amp = deg(rng.uniform(5, 10));  // the non-waving arm
      p.arm_freq = rng.uniform(0.5, 0.9);
      p.elbow_amp = deg(rng.uniform(15, 30));
      p.leg_amp = deg(rng.uniform(1, 4));
      p.knee_amp = deg(rng.uniform(2, 6));
      p.raise0 = deg(rng.uniform(85, 110));
      p.raise_amp = deg(rng.uniform(10, 20));
      p.raise_freq = rng.uniform(0.7, 1.2);
      break;
    case 2:  // squat: vertical cycles, feet planted, arms forward
      p.amp = {rng.uniform(0.01, 0.05), rng.uniform(0.01, 0.05)};
      p.freq = {rng.uniform(0.05, 0.1), rng.uniform(0.05, 0.1)};
      p.yaw_amp = deg(rng.uniform(2, 8));
      p.yaw_freq = rng.uniform(0.05, 0.1);
      p.squat_depth = rng.uniform(0.15, 0.28);
      p.squat_freq = rng.uniform(0.15, 0.3);
      break;
    default:  // sway: gentle idling
      p.amp = {rng.uniform(0.08, 0.18), rng.uniform(0.08, 0.18)};
      p.freq = {rng.uniform(0.15, 0.4), rng.uniform(0.15, 0.4)};
      p.yaw_amp = deg(rng.uniform(10, 20));
      p.yaw_freq = rng.uniform(0.1, 0.25);
      p.arm_amp = deg(rng.uniform(5, 12));
      p.arm_freq = rng.uniform(0.4, 0.8);
      p.elbow_amp = deg(rng.uniform(5, 10));
      p.leg_amp = deg(rng.uniform(1, 5));
      p.knee_amp = deg(rng.uniform(2, 8));
      p.bob_amp = rng.uniform(0.004, 0.01);
      p.bob_freq = 2.0 * p.arm_freq;
      break;
  }
  return p;
}

struct FramePose {
  JointMatrix joints{16, 3};
  RigidTransform device;
};

// Forward kinematics over the canonical tree. Bone lengths never change;
// only joint rotations and the root path do.
FramePose pose_at(const MotionParams& p, double t) {
  FramePose out;
  const double yaw =
      p.yaw0 + p.yaw_amp * std::sin(kTau * p.yaw_freq * t + p.yaw_phase);
  const Eigen::Matrix3d rb = rot_y(yaw);
  const double squat_d =
      p.squat_depth * 0.5 * (1.0 - std::cos(kTau * p.squat_freq * t));
  const double neck_h = 1.50 - squat_d +
                        p.bob_amp * std::sin(kTau * p.bob_freq * t);
  const Eigen::Vector3d neck(
      p.center.x() + p.amp.x() * std::sin(kTau * p.freq.x() * t + p.phase.x()),
      neck_h,
      p.center.y() + p.amp.y() * std::sin(kTau * p.freq.y() * t + p.phase.y()));

  const double head_turn =
      p.head_turn_amp * std::sin(kTau * p.head_freq * t + p.head_phase);
  const Eigen::Matrix3d rh = rot_y(yaw + head_turn);
  out.joints.row(1) = neck;
  out.joints.row(0) = neck + rh * Eigen::Vector3d(0, 0.16, 0);

  const double swing = kTau * p.arm_freq * t + p.arm_phase;
  const double squat_frac =
      p.squat_depth > 0 ? squat_d / p.squat_depth : 0.0;
  for (int side = 0; side < 2; ++side) {
    const double sx = side == 0 ? 1.0 : -1.0;  // left = +x before yaw
    const int ja = side == 0 ? 2 : 9;          // upper arm joint index
    const int jl = side == 0 ? 5 : 12;         // thigh joint index
    const double arm_sign = side == 0 ? 1.0 : -1.0;

    Eigen::Matrix3d r_sh;
    double elbow;
    if (p.category == 1 && side == 0) {
      // waving left arm: raised sideways, forearm wobbling
      const double raise =
          p.raise0 + p.raise_amp * std::sin(kTau * p.raise_freq * t);
      r_sh = rot_z(raise);
      elbow = 0.0;
    } else if (p.category == 2) {
      // squat: both arms forward as a counterweight
      r_sh = rot_x(-deg(70) * squat_frac);
      elbow = -deg(10) * squat_frac;
    } else {
      r_sh = rot_x(arm_sign * p.arm_amp * std::sin(swing));
      elbow = -p.elbow_amp * 0.5 * (1.0 + std::sin(swing + kTau / 4));
    }
    Eigen::Matrix3d r_el;
    if (p.category == 1 && side == 0) {
      r_el = r_sh * rot_z(p.elbow_amp *
                          std::sin(kTau * 2.0 * p.raise_freq * t));
    } else {
      r_el = r_sh * rot_x(elbow);
    }
    const Eigen::Vector3d sh = neck + rb * Eigen::Vector3d(sx * 0.20, -0.05, 0);
    const Eigen::Vector3d el =
        sh + rb * r_sh * Eigen::Vector3d(sx * 0.04, -0.28, 0);
    const Eigen::Vector3d ha =
        el + rb * r_el * Eigen::Vector3d(sx * 0.02, -0.25, 0);
    out.joints.row(ja) = sh;
    out.joints.row(ja + 1) = el;
    out.joints.row(ja + 2) = ha;

    const Eigen::Vector3d hip =
        neck + rb * Eigen::Vector3d(sx * 0.10, -0.55, 0);
    Eigen::Vector3d knee, ankle, ball;
    if (p.category == 2) {
      // two-link squat: knees forward, ankle pinned under the hip
      const double cg = std::clamp((0.86 - squat_d) / 0.86, -1.0, 1.0);
      const double sg = std::sqrt(std::max(0.0, 1.0 - cg * cg));
      knee = hip + rb * Eigen::Vector3d(sx * 0.01, -0.43 * cg, 0.43 * sg);
      ankle = knee + rb * Eigen::Vector3d(sx * 0.01, -0.43 * cg, -0.43 * sg);
      ball = ankle + rb * Eigen::Vector3d(0, -0.07, 0.13);
    } else {
      const double hip_a = -arm_sign * p.leg_amp * std::sin(swing);
      const double knee_a =
          p.knee_amp * 0.5 * (1.0 + std::sin(swing - kTau / 4));
      const Eigen::Matrix3d r_hip = rot_x(hip_a);
      const Eigen::Matrix3d r_kn = r_hip * rot_x(knee_a);
      knee = hip + rb * r_hip * Eigen::Vector3d(sx * 0.01, -0.43, 0);
      ankle = knee + rb * r_kn * Eigen::Vector3d(sx * 0.01, -0.43, 0);
      ball = ankle + rb * r_kn * Eigen::Vector3d(0, -0.07, 0.13);
    }
    out.joints.row(jl) = hip;
    out.joints.row(jl + 1) = knee;
    out.joints.row(jl + 2) = ankle;
    out.joints.row(jl + 3) = ball;
  }

  const double tilt =
      p.tilt0 + p.nod_amp * std::sin(kTau * p.nod_freq * t + p.nod_phase);
  const double c = std::cos(tilt);
  const double s = std::sin(tilt);
  // Columns are the device axes in the head frame: x along the baseline
  // (left camera toward the wearer's left), z pitched down at the body.
  Eigen::Matrix3d r_tilt;
  r_tilt << -1, 0, 0,
             0, -c, -s,
             0, -s, c;
  out.device.rotation = rh * r_tilt;
  out.device.translation = neck + rh * Eigen::Vector3d(0, 0.12, 0.10);
  return out;
}

std::string frame_file(const std::string& seq_id, int idx, int view) {
  return seq_id + "_" + std::to_string(idx) + "_" + (view == 0 ? "l" : "r") +
         ".png";
}

}  // namespace

DatasetIndex generate_synthetic_dataset(const SyntheticConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  const fs::path root(cfg.out_dir);
  fs::create_directories(root / "rgb");
  fs::create_directories(root / "depth");
  if (cfg.write_masks) fs::create_directories(root / "masks");

  DatasetIndex index;
  index.root = root;
  index.rig.camera =
      FisheyeCamera::inscribed(cfg.image_size, cfg.image_size,
                               deg(cfg.fov_deg));
  index.rig.rig = StereoRig{};
  index.skeleton = SkeletonDefinition::canonical();
  index.room = depth::RoomBox{};
  const depth::RoomBox& room = *index.room;
  const FisheyeCamera& cam = index.rig.camera;
  const FisheyeCamera qcam = cam.quarter();
  const int hm_count = static_cast<int>(index.skeleton.heatmap_joints.size());

  for (int si = 0; si < cfg.sequences; ++si) {
    Rng rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * (si + 1)));
    const int cat = si % 4;
    const MotionParams params = draw_params(cat, rng);

    SequenceRecord seq;
    seq.id = "seq" + std::string(si < 10 ? "00" : si < 100 ? "0" : "") +
             std::to_string(si);
    seq.fps = cfg.fps;
    seq.category = kSyntheticCategories[cat];

    for (int fi = 0; fi < cfg.frames_per_sequence; ++fi) {
      const double t = fi / cfg.fps;
      const FramePose fp = pose_at(params, t);
      for (int j = 0; j < fp.joints.rows(); ++j) {
        if (fp.joints(j, 1) < -0.005 || !room.contains({fp.joints(j, 0),
                                                        std::max(0.0, fp.joints(j, 1)),
                                                        fp.joints(j, 2)}))
          throw ConfigError("synthetic: motion left the room in " + seq.id +
                            " frame " + std::to_string(fi));
      }

      FrameRecord rec;
      rec.idx = fi;
      rec.pose_world = fp.joints;
      rec.device_from_world = fp.device;
      rec.depth_available = rng.uniform() >= cfg.depth_dropout;

      const auto capsules = depth::body_capsules(index.skeleton, fp.joints);
      for (int v = 0; v < 2; ++v) {
        const RigidTransform cam_to_world =
            fp.device * index.rig.rig.cam_to_device(v);
        const RigidTransform world_to_cam = cam_to_world.inverse();

        rec.joints2d[v].px.resize(hm_count, 2);
        rec.joints2d[v].px.setZero();
        rec.joints2d[v].visible.assign(hm_count, 0);
        for (int k = 0; k < hm_count; ++k) {
          const int j = index.skeleton.heatmap_joints[k];
          const Eigen::Vector3d p_cam =
              world_to_cam.apply(fp.joints.row(j).transpose());
          if (auto px = fisheye_project(cam, p_cam)) {
            rec.joints2d[v].px.row(k) = px->transpose();
            rec.joints2d[v].visible[k] = 1;
          }
        }

        const io::Image img =
            depth::render_scene_image(cam, cam_to_world, capsules, room);
        rec.img[v] = "rgb/" + frame_file(seq.id, fi, v);
        io::save_png_rgb(index.resolve(rec.img[v]), img);

        const depth::MaskMatrix body =
            depth::render_body_mask(cam, cam_to_world, capsules, room);
        if (cfg.write_masks) {
          io::Image mimg = io::Image::filled(cam.width, cam.height, 0, 0, 0);
          for (int y = 0; y < cam.height; ++y)
            for (int x = 0; x < cam.width; ++x)
              if (body(y, x)) {
                auto* px = mimg.px(x, y);
                px[0] = px[1] = px[2] = 255;
              }
          io::save_png_rgb((root / "masks" / frame_file(seq.id, fi, v)).string(),
                           mimg);
        }

        const depth::DepthObservation obs =
            rec.depth_available
                ? depth::depth_from_scene(room, qcam, cam_to_world, body)
                : depth::DepthObservation::unavailable(qcam.width, qcam.height);
        rec.depth[v] = "depth/" + frame_file(seq.id, fi, v);
        depth::save_depth_png(index.resolve(rec.depth[v]), obs);
      }
      seq.frames.push_back(std::move(rec));
    }
    index.sequences.push_back(std::move(seq));
  }

  save_manifest(index);
  return index;
}

}  // namespace egostereo::data
