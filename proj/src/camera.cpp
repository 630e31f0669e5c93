#include "scenefill/camera.hpp"

namespace scenefill {

void Pose::validate(double tol) const {
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol)
    throw DataError("pose: rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > tol)
    throw DataError("pose: rotation determinant is not +1");
}

Pose relative_transform(const Pose& pose_n, const Pose& pose_i) {
  const Eigen::Matrix3d r = pose_i.rotation * pose_n.rotation.transpose();
  const Eigen::Vector3d t = pose_i.translation - r * pose_n.translation;
  return Pose::make_unchecked(r, t);
}

}  // namespace scenefill
