#pragma once

#include <string>

#include "egostereo/geometry/fisheye.hpp"
#include "egostereo/geometry/rigid.hpp"

namespace egostereo {

// On-disk rig description. Both views share the fisheye intrinsics.
// Schema:
//   { "focal_scale": <px/rad>, "principal_point": [u, v],
//     "resolution": [w, h], "fov_deg": <deg>, "baseline_m": <m> }
struct RigDescription {
  FisheyeCamera camera;
  StereoRig rig;
};

RigDescription load_rig_json(const std::string& path);
void save_rig_json(const std::string& path, const RigDescription& rig);

std::string rig_to_json(const RigDescription& rig);
RigDescription rig_from_json(const std::string& text);

}  // namespace egostereo
