#pragma once

#include <string>

#include "egostereo/depth/raycast.hpp"
#include "egostereo/nn/tensor.hpp"

namespace egostereo::depth {

// Quarter-resolution scene-depth input for one view of one frame.
// Invariants (checked by validate()):
//   available:  depth > 0 exactly where region_mask is set
//   !available: depth and region_mask are identically zero
// region_mask excludes the person and anything beyond the lens circle; the
// depth values describe the static room only.
using DepthMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct DepthObservation {
  DepthMatrix depth;  // meters; 0 outside the region mask
  MaskMatrix region_mask;
  bool available = false;

  int width() const { return static_cast<int>(depth.cols()); }
  int height() const { return static_cast<int>(depth.rows()); }
  void validate() const;

  static DepthObservation unavailable(int w, int h);
};

// Additive attention bias for this observation's tokens: -inf hides the
// tokens of a missing observation, 0 leaves a present one untouched.
float padding_value(const DepthObservation& obs);

// Ray-casts the room at the quarter camera's pixel centers. Pixels whose
// 4x4 full-resolution block touches the body silhouette are excluded, as
// are pixels beyond the lens circle. body_mask must match the full camera
// resolution (4x the quarter camera).
DepthObservation depth_from_scene(const RoomBox& room,
                                  const FisheyeCamera& quarter_cam,
                                  const RigidTransform& cam_to_world,
                                  const MaskMatrix& body_mask);

// 16-bit PNG, 1 unit = 1 mm, zeros where invalid. Values above 65.535 m
// saturate.
void save_depth_png(const std::string& path, const DepthObservation& obs);

// Loads a depth map saved by save_depth_png. The region mask is recovered
// from the nonzero pixels. When available = false the file is ignored and a
// canonical all-zero observation is returned. Wrong resolution -> DataError.
DepthObservation load_depth_png(const std::string& path, int expect_w,
                                int expect_h, bool available);

// Network input (2,H,W): channel 0 = clamp(depth,0,10)/10, channel 1 = the
// region mask as 0/1.
nn::Tensor<float> depth_to_input(const DepthObservation& obs);

}  // namespace egostereo::depth
