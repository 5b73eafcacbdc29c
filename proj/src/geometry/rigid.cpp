#include "egostereo/geometry/rigid.hpp"

#include <sstream>

#include "egostereo/errors.hpp"

namespace egostereo {

void RigidTransform::validate() const {
  const double ortho =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm();
  const double det = rotation.determinant();
  if (ortho > 1e-9 || std::abs(det - 1.0) > 1e-9) {
    std::ostringstream why;
    why << "RigidTransform: rotation not in SO(3): |R'R - I| = " << ortho
        << ", det = " << det;
    throw ConfigError(why.str());
  }
}

RigidTransform StereoRig::cam_to_device(int view) const {
  if (view != 0 && view != 1) {
    throw ConfigError("StereoRig: view must be 0 (left) or 1 (right)");
  }
  RigidTransform out;
  const double sign = (view == 0) ? -0.5 : 0.5;
  out.translation = Eigen::Vector3d(sign * baseline, 0.0, 0.0);
  return out;
}

Eigen::Matrix<double, Eigen::Dynamic, 3> SimilarityTransform::apply_rows(
    const Eigen::Matrix<double, Eigen::Dynamic, 3>& pts) const {
  Eigen::Matrix<double, Eigen::Dynamic, 3> out =
      scale * (pts * rotation.transpose());
  out.rowwise() += translation.transpose();
  return out;
}

}  // namespace egostereo
