#include "egostereo/geometry/procrustes.hpp"

#include <Eigen/SVD>
#include <sstream>

namespace egostereo {

SimilarityTransform procrustes_align(
    const Eigen::Matrix<double, Eigen::Dynamic, 3>& source,
    const Eigen::Matrix<double, Eigen::Dynamic, 3>& target) {
  const Eigen::Index n = source.rows();
  if (n != target.rows()) {
    throw DegenerateInputError("procrustes_align: row count mismatch");
  }
  if (n < 3) {
    throw DegenerateInputError(
        "procrustes_align: need at least 3 correspondences");
  }

  const Eigen::RowVector3d mu_s = source.colwise().mean();
  const Eigen::RowVector3d mu_t = target.colwise().mean();
  const Eigen::Matrix<double, Eigen::Dynamic, 3> xs = source.rowwise() - mu_s;
  const Eigen::Matrix<double, Eigen::Dynamic, 3> ys = target.rowwise() - mu_t;

  const double var_s = xs.squaredNorm() / static_cast<double>(n);
  if (var_s == 0.0) {
    throw AlignmentDegenerateError(
        "procrustes_align: all source points coincident", {});
  }

  // Cross-covariance with target on the left so R maps source -> target.
  const Eigen::Matrix3d cov = (ys.transpose() * xs) / static_cast<double>(n);
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d d = svd.singularValues();

  Eigen::Vector3d flip(1.0, 1.0, 1.0);
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    flip.z() = -1.0;
  }

  SimilarityTransform out;
  out.rotation =
      svd.matrixU() * flip.asDiagonal() * svd.matrixV().transpose();
  out.scale = d.dot(flip) / var_s;
  out.translation =
      mu_t.transpose() - out.scale * (out.rotation * mu_s.transpose());

  // Collinear source points leave a free rotation about the line: the
  // covariance drops below rank 2.
  if (d(1) <= 1e-12 * d(0)) {
    std::ostringstream why;
    why << "procrustes_align: rank-deficient covariance (singular values "
        << d.transpose() << ")";
    throw AlignmentDegenerateError(why.str(), out);
  }
  return out;
}

}  // namespace egostereo
