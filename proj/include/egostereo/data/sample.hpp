#pragma once

#include "egostereo/data/manifest.hpp"
#include "egostereo/io/png_io.hpp"
#include "egostereo/nn/tensor.hpp"

namespace egostereo::data {

// (3,H,W) float in [0,1], channel-major.
nn::Tensor<float> image_to_input(const io::Image& img);

// Loads the view's RGB file and converts it.
nn::Tensor<float> load_image_input(const DatasetIndex& index,
                                   const FrameRecord& frame, int view);

// Ground-truth heatmap stack for one view at quarter resolution,
// (J, H/4, W/4); channels of invisible joints stay zero.
nn::Tensor<float> gt_heatmaps(const DatasetIndex& index,
                              const FrameRecord& frame, int view);

// World pose re-expressed in the frame's own device coordinates.
JointMatrix gt_pose_device(const FrameRecord& frame);

}  // namespace egostereo::data
