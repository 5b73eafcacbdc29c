#pragma once

#include <Eigen/Core>

#include "egostereo/errors.hpp"
#include "egostereo/geometry/rigid.hpp"

namespace egostereo {

// Thrown when the point sets do not pin down a rotation (all source points
// collinear or coincident). Carries the best transform we could still make
// so callers may inspect or discard it.
struct AlignmentDegenerateError : DegenerateInputError {
  SimilarityTransform partial;
  AlignmentDegenerateError(const std::string& msg, SimilarityTransform p)
      : DegenerateInputError(msg), partial(std::move(p)) {}
};

// Least-squares similarity (scale + rotation + translation) mapping each
// source row onto the matching target row. Needs >= 3 rows.
SimilarityTransform procrustes_align(
    const Eigen::Matrix<double, Eigen::Dynamic, 3>& source,
    const Eigen::Matrix<double, Eigen::Dynamic, 3>& target);

}  // namespace egostereo
