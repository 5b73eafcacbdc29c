#include "egostereo/geometry/fisheye.hpp"

#include <cmath>
#include <sstream>

#include "egostereo/errors.hpp"

namespace egostereo {

FisheyeCamera FisheyeCamera::inscribed(int width, int height, double fov_rad) {
  FisheyeCamera cam;
  cam.width = width;
  cam.height = height;
  cam.fov_rad = fov_rad;
  cam.principal_point = Eigen::Vector2d(0.5 * width, 0.5 * height);
  cam.focal_scale = 0.5 * std::min(width, height) / (0.5 * fov_rad);
  cam.validate();
  return cam;
}

void FisheyeCamera::validate() const {
  std::ostringstream why;
  if (width <= 0 || height <= 0) {
    why << "resolution must be positive, got " << width << "x" << height;
  } else if (!(fov_rad > 0.0 && fov_rad < M_PI)) {
    why << "fov must lie in (0, pi), got " << fov_rad;
  } else if (!(focal_scale > 0.0)) {
    why << "focal_scale must be positive, got " << focal_scale;
  } else if (principal_point.x() < 0.0 || principal_point.x() >= width ||
             principal_point.y() < 0.0 || principal_point.y() >= height) {
    why << "principal point (" << principal_point.transpose()
        << ") outside image rectangle";
  } else {
    const double radius = focal_scale * 0.5 * fov_rad;
    const double expect = 0.5 * std::min(width, height);
    if (std::abs(radius - expect) > 1e-6 * expect) {
      why << "image circle not inscribed: focal_scale*fov/2 = " << radius
          << " but min(w,h)/2 = " << expect;
    }
  }
  if (!why.str().empty()) throw ConfigError("FisheyeCamera: " + why.str());
}

FisheyeCamera FisheyeCamera::quarter() const {
  FisheyeCamera cam = *this;
  cam.width = width / 4;
  cam.height = height / 4;
  cam.focal_scale = focal_scale / 4.0;
  cam.principal_point = principal_point / 4.0;
  cam.validate();
  return cam;
}

std::optional<Eigen::Vector2d> fisheye_project(const FisheyeCamera& cam,
                                               const Eigen::Vector3d& point) {
  const double norm = point.norm();
  if (norm == 0.0) {
    throw DegenerateInputError("fisheye_project: zero-norm point");
  }
  const double rho = std::hypot(point.x(), point.y());
  const double theta = std::atan2(rho, point.z());
  if (theta > 0.5 * cam.fov_rad) return std::nullopt;

  Eigen::Vector2d pixel = cam.principal_point;
  if (rho > 0.0) {
    pixel += (cam.focal_scale * theta / rho) * Eigen::Vector2d(point.x(), point.y());
  }
  if (pixel.x() < 0.0 || pixel.x() >= cam.width || pixel.y() < 0.0 ||
      pixel.y() >= cam.height) {
    return std::nullopt;
  }
  return pixel;
}

Eigen::Vector3d fisheye_unproject(const FisheyeCamera& cam,
                                  const Eigen::Vector2d& pixel) {
  const Eigen::Vector2d d = pixel - cam.principal_point;
  const double r = d.norm();
  const double theta = r / cam.focal_scale;
  // Tiny slack so project -> unproject round trips at exactly fov/2.
  if (theta > 0.5 * cam.fov_rad * (1.0 + 1e-12)) {
    throw OutOfViewError("fisheye_unproject: pixel beyond image circle");
  }
  if (r == 0.0) return Eigen::Vector3d(0.0, 0.0, 1.0);
  const Eigen::Vector2d dir = d / r;
  const double s = std::sin(theta);
  return Eigen::Vector3d(s * dir.x(), s * dir.y(), std::cos(theta));
}

}  // namespace egostereo
