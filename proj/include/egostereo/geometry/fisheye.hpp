#pragma once

#include <Eigen/Core>
#include <optional>

namespace egostereo {

// Equidistant fisheye: a ray at polar angle theta from the optical axis
// lands at radius focal_scale * theta from the principal point. The lens
// circle is inscribed in the image: focal_scale * fov/2 == min(w,h)/2,
// which validate() enforces, so fov, focal_scale and resolution cannot
// drift apart.
struct FisheyeCamera {
  double focal_scale = 0.0;            // pixels per radian
  Eigen::Vector2d principal_point{0.0, 0.0};
  int width = 0;
  int height = 0;
  double fov_rad = 0.0;

  // Centered principal point, focal scale derived from the circle invariant.
  static FisheyeCamera inscribed(int width, int height, double fov_rad);

  // Throws ConfigError when any invariant is violated.
  void validate() const;

  // Image circle radius in pixels (== focal_scale * fov/2).
  double circle_radius() const { return 0.5 * std::min(width, height); }

  FisheyeCamera quarter() const;  // same rig at 1/4 resolution
};

// Camera-frame point -> pixel. Out-of-view (theta beyond fov/2, or the
// pixel landing outside the image rectangle) comes back as nullopt.
// A zero-norm point has no direction and throws DegenerateInputError.
std::optional<Eigen::Vector2d> fisheye_project(const FisheyeCamera& cam,
                                               const Eigen::Vector3d& point);

// Pixel -> unit ray in the camera frame. Pixels beyond the image circle
// throw OutOfViewError.
Eigen::Vector3d fisheye_unproject(const FisheyeCamera& cam,
                                  const Eigen::Vector2d& pixel);

}  // namespace egostereo
