#include "egostereo/data/sample.hpp"

#include "egostereo/data/heatmap_target.hpp"
#include "egostereo/skeleton/skeleton.hpp"

namespace egostereo::data {

nn::Tensor<float> image_to_input(const io::Image& img) {
  nn::Tensor<float> t({3, img.height, img.width});
  const std::int64_t plane =
      static_cast<std::int64_t>(img.height) * img.width;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::uint8_t* p = img.px(x, y);
      const std::int64_t at = static_cast<std::int64_t>(y) * img.width + x;
      t.data[at] = p[0] / 255.0f;
      t.data[plane + at] = p[1] / 255.0f;
      t.data[2 * plane + at] = p[2] / 255.0f;
    }
  }
  return t;
}

nn::Tensor<float> load_image_input(const DatasetIndex& index,
                                   const FrameRecord& frame, int view) {
  return image_to_input(io::load_png_rgb(index.resolve(frame.img[view])));
}

nn::Tensor<float> gt_heatmaps(const DatasetIndex& index,
                              const FrameRecord& frame, int view) {
  const FisheyeCamera q = index.rig.camera.quarter();
  return render_gt_heatmap(frame.joints2d[view], q.width, q.height);
}

JointMatrix gt_pose_device(const FrameRecord& frame) {
  Pose3D world{frame.pose_world, PoseFrame::World};
  return to_device_frame(world, frame.device_from_world).joints;
}

}  // namespace egostereo::data
