#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace egostereo {

// SE(3) transform, applied as p' = R p + t.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  // Throws ConfigError unless rotation is orthonormal with det +1
  // (within 1e-9).
  void validate() const;

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }

  RigidTransform inverse() const {
    RigidTransform out;
    out.rotation = rotation.transpose();
    out.translation = -(out.rotation * translation);
    return out;
  }

  // Composition: (a * b).apply(p) == a.apply(b.apply(p)).
  friend RigidTransform operator*(const RigidTransform& a,
                                  const RigidTransform& b) {
    RigidTransform out;
    out.rotation = a.rotation * b.rotation;
    out.translation = a.rotation * b.translation + a.translation;
    return out;
  }
};

// Two identical fisheye cameras looking down the shared +z axis, separated
// along x by `baseline` meters. cam_to_device(view) places a camera frame
// inside the device frame; device->world comes from per-frame data.
struct StereoRig {
  double baseline = 0.12;

  RigidTransform cam_to_device(int view) const;  // view: 0 = left, 1 = right
};

// p' = scale * R p + t. Produced by Procrustes alignment.
struct SimilarityTransform {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return scale * (rotation * p) + translation;
  }

  // Applies to each row of an Nx3 matrix.
  Eigen::Matrix<double, Eigen::Dynamic, 3> apply_rows(
      const Eigen::Matrix<double, Eigen::Dynamic, 3>& pts) const;
};

}  // namespace egostereo
