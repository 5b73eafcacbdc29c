#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "egostereo/geometry/fisheye.hpp"
#include "egostereo/geometry/rigid.hpp"
#include "egostereo/io/png_io.hpp"
#include "egostereo/skeleton/skeleton.hpp"

namespace egostereo::depth {

using MaskMatrix =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Axis-aligned room, y-up, floor at min_corner.y (the generator keeps the
// floor at y = 0). Cameras always stay inside.
struct RoomBox {
  Eigen::Vector3d min_corner{-2.5, 0.0, -3.0};
  Eigen::Vector3d max_corner{2.5, 3.0, 3.0};

  void validate() const;
  bool contains(const Eigen::Vector3d& p) const;
};

// Distance from an interior origin to the wall along a unit direction.
// Optionally reports which face was hit (axis 0..2, sign -1/+1).
double room_exit_distance(const RoomBox& room, const Eigen::Vector3d& origin,
                          const Eigen::Vector3d& dir, int* face_axis = nullptr,
                          int* face_sign = nullptr);

struct Capsule {
  Eigen::Vector3d a;
  Eigen::Vector3d b;
  double radius = 0.04;
};

// Smallest t > 0 with |origin + t*dir - segment| = radius, if any.
std::optional<double> ray_capsule(const Eigen::Vector3d& origin,
                                  const Eigen::Vector3d& dir,
                                  const Capsule& c);

// One capsule per bone (radius by limb type) plus a head sphere.
std::vector<Capsule> body_capsules(const SkeletonDefinition& skel,
                                   const JointMatrix& joints_world);

// True where a body capsule is the nearest hit, i.e. the person's
// silhouette. Pixels beyond the lens circle are false.
MaskMatrix render_body_mask(const FisheyeCamera& cam,
                            const RigidTransform& cam_to_world,
                            const std::vector<Capsule>& body,
                            const RoomBox& room);

// Flat-shaded render: checkered walls and distinct capsule colors so the
// views carry enough texture to localize limbs. Purely deterministic.
io::Image render_scene_image(const FisheyeCamera& cam,
                             const RigidTransform& cam_to_world,
                             const std::vector<Capsule>& body,
                             const RoomBox& room);

}  // namespace egostereo::depth
