#include "egostereo/depth/providers.hpp"

#include <filesystem>

#include "egostereo/data/manifest.hpp"
#include "egostereo/depth/raycast.hpp"
#include "egostereo/errors.hpp"
#include "egostereo/io/png_io.hpp"

namespace egostereo::depth {

MaskMatrix NullMaskProvider::mask_for(
    const data::DatasetIndex& index, const data::SequenceRecord&,
    const data::FrameRecord&, int,
    const std::vector<std::optional<Eigen::Vector2d>>&) {
  return MaskMatrix::Zero(index.rig.camera.height, index.rig.camera.width);
}

MaskMatrix OracleMaskProvider::mask_for(
    const data::DatasetIndex& index, const data::SequenceRecord&,
    const data::FrameRecord& frame, int view,
    const std::vector<std::optional<Eigen::Vector2d>>&) {
  if (!index.room.has_value())
    throw DataError("oracle mask provider needs scene geometry in the dataset");
  const RigidTransform cam_to_world = data::camera_to_world(index, frame, view);
  const auto capsules = body_capsules(index.skeleton, frame.pose_world);
  return render_body_mask(index.rig.camera, cam_to_world, capsules,
                          *index.room);
}

std::string DiskMaskProvider::mask_filename(const std::string& seq_id,
                                            int frame_idx, int view) {
  return seq_id + "_" + std::to_string(frame_idx) + "_" +
         (view == 0 ? "l" : "r") + ".png";
}

MaskMatrix DiskMaskProvider::mask_for(
    const data::DatasetIndex& index, const data::SequenceRecord& seq,
    const data::FrameRecord& frame, int view,
    const std::vector<std::optional<Eigen::Vector2d>>&) {
  const std::filesystem::path path =
      std::filesystem::path(dir_) / mask_filename(seq.id, frame.idx, view);
  if (!std::filesystem::exists(path))
    throw DataError("missing mask image: " + path.string());
  const io::Image img = io::load_png_rgb(path.string());
  if (img.width != index.rig.camera.width ||
      img.height != index.rig.camera.height)
    throw DataError("mask image " + path.string() + " is " +
                    std::to_string(img.width) + "x" +
                    std::to_string(img.height) + ", expected " +
                    std::to_string(index.rig.camera.width) + "x" +
                    std::to_string(index.rig.camera.height));
  MaskMatrix mask(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const std::uint8_t* p = img.px(x, y);
      mask(y, x) = (p[0] | p[1] | p[2]) != 0 ? 1 : 0;
    }
  return mask;
}

std::unique_ptr<BodyMaskProvider> make_mask_provider(const std::string& kind,
                                                     const std::string& dir) {
  if (kind == "null") return std::make_unique<NullMaskProvider>();
  if (kind == "oracle") return std::make_unique<OracleMaskProvider>();
  if (kind == "disk") {
    if (dir.empty()) throw ConfigError("disk mask provider needs a directory");
    return std::make_unique<DiskMaskProvider>(dir);
  }
  throw ConfigError("unknown mask provider: " + kind);
}

DepthObservation DiskDepthProvider::depth_for(const data::DatasetIndex& index,
                                              const data::SequenceRecord&,
                                              const data::FrameRecord& frame,
                                              int view) {
  const FisheyeCamera q = index.rig.camera.quarter();
  if (!frame.depth_available)
    return DepthObservation::unavailable(q.width, q.height);
  return load_depth_png(index.resolve(frame.depth[view]), q.width, q.height,
                        true);
}

DepthObservation OracleDepthProvider::depth_for(const data::DatasetIndex& index,
                                                const data::SequenceRecord&,
                                                const data::FrameRecord& frame,
                                                int view) {
  if (!index.room.has_value())
    throw DataError(
        "oracle depth provider needs scene geometry in the dataset");
  const RigidTransform cam_to_world = data::camera_to_world(index, frame, view);
  const auto capsules = body_capsules(index.skeleton, frame.pose_world);
  const MaskMatrix body =
      render_body_mask(index.rig.camera, cam_to_world, capsules, *index.room);
  return depth_from_scene(*index.room, index.rig.camera.quarter(),
                          cam_to_world, body);
}

DepthObservation NoneDepthProvider::depth_for(const data::DatasetIndex& index,
                                              const data::SequenceRecord&,
                                              const data::FrameRecord&, int) {
  const FisheyeCamera q = index.rig.camera.quarter();
  return DepthObservation::unavailable(q.width, q.height);
}

std::unique_ptr<DepthObservationProvider> make_depth_provider(
    const std::string& kind) {
  if (kind == "disk") return std::make_unique<DiskDepthProvider>();
  if (kind == "oracle") return std::make_unique<OracleDepthProvider>();
  if (kind == "none") return std::make_unique<NoneDepthProvider>();
  throw ConfigError("unknown depth provider: " + kind);
}

}  // namespace egostereo::depth
