#include "egostereo/depth/observation.hpp"

#include <cmath>
#include <limits>

#include "egostereo/errors.hpp"

namespace egostereo::depth {

void DepthObservation::validate() const {
  if (depth.rows() != region_mask.rows() ||
      depth.cols() != region_mask.cols()) {
    throw ConfigError("DepthObservation: depth/mask shape mismatch");
  }
  for (Eigen::Index i = 0; i < depth.size(); ++i) {
    const bool pos = depth.data()[i] > 0.0f;
    const bool masked = region_mask.data()[i] != 0;
    if (!available && (pos || masked)) {
      throw ConfigError(
          "DepthObservation: unavailable observation must be all-zero");
    }
    if (available && pos != masked) {
      throw ConfigError(
          "DepthObservation: depth>0 must coincide with the region mask");
    }
  }
}

DepthObservation DepthObservation::unavailable(int w, int h) {
  DepthObservation obs;
  obs.depth = DepthMatrix::Zero(h, w);
  obs.region_mask = MaskMatrix::Zero(h, w);
  obs.available = false;
  return obs;
}

float padding_value(const DepthObservation& obs) {
  return obs.available ? 0.0f : -std::numeric_limits<float>::infinity();
}

DepthObservation depth_from_scene(const RoomBox& room,
                                  const FisheyeCamera& quarter_cam,
                                  const RigidTransform& cam_to_world,
                                  const MaskMatrix& body_mask) {
  const int w = quarter_cam.width, h = quarter_cam.height;
  if (body_mask.rows() != 4 * h || body_mask.cols() != 4 * w) {
    throw ConfigError("depth_from_scene: body mask is not 4x the depth grid");
  }
  DepthObservation obs;
  obs.depth = DepthMatrix::Zero(h, w);
  obs.region_mask = MaskMatrix::Zero(h, w);
  obs.available = true;
  const Eigen::Vector3d origin = cam_to_world.translation;
  const double circle2 =
      quarter_cam.circle_radius() * quarter_cam.circle_radius();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Eigen::Vector2d px(x + 0.5, y + 0.5);
      if ((px - quarter_cam.principal_point).squaredNorm() > circle2) continue;
      const bool body_touches =
          body_mask.block(4 * y, 4 * x, 4, 4).sum() != 0;
      if (body_touches) continue;
      const Eigen::Vector3d ray =
          cam_to_world.rotation * fisheye_unproject(quarter_cam, px);
      obs.depth(y, x) =
          static_cast<float>(room_exit_distance(room, origin, ray));
      obs.region_mask(y, x) = 1;
    }
  }
  return obs;
}

void save_depth_png(const std::string& path, const DepthObservation& obs) {
  obs.validate();
  io::Gray16 img(obs.depth.rows(), obs.depth.cols());
  for (Eigen::Index i = 0; i < obs.depth.size(); ++i) {
    const double mm = std::round(obs.depth.data()[i] * 1000.0);
    img.data()[i] = static_cast<std::uint16_t>(
        std::min(65535.0, std::max(0.0, mm)));
  }
  io::save_png_gray16(path, img);
}

DepthObservation load_depth_png(const std::string& path, int expect_w,
                                int expect_h, bool available) {
  if (!available) return DepthObservation::unavailable(expect_w, expect_h);
  const io::Gray16 img = io::load_png_gray16(path);
  if (img.cols() != expect_w || img.rows() != expect_h) {
    throw DataError("depth png: " + path + " has resolution " +
                    std::to_string(img.cols()) + "x" +
                    std::to_string(img.rows()) + ", expected " +
                    std::to_string(expect_w) + "x" + std::to_string(expect_h));
  }
  DepthObservation obs;
  obs.available = true;
  obs.depth.resize(img.rows(), img.cols());
  obs.region_mask.resize(img.rows(), img.cols());
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    obs.depth.data()[i] = static_cast<float>(img.data()[i]) / 1000.0f;
    obs.region_mask.data()[i] = img.data()[i] > 0 ? 1 : 0;
  }
  return obs;
}

nn::Tensor<float> depth_to_input(const DepthObservation& obs) {
  const int h = obs.height(), w = obs.width();
  nn::Tensor<float> t({2, h, w});
  for (Eigen::Index i = 0; i < obs.depth.size(); ++i) {
    t.data[i] = std::min(10.0f, std::max(0.0f, obs.depth.data()[i])) / 10.0f;
    t.data[obs.depth.size() + i] = obs.region_mask.data()[i] ? 1.0f : 0.0f;
  }
  return t;
}

}  // namespace egostereo::depth
