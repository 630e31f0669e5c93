#pragma once

#include <Eigen/Dense>

#include "scenefill/error.hpp"

namespace scenefill {

/// Pinhole intrinsics. Camera looks down +Z, x right, y down; pixel u grows
/// right, v grows down. Pixel (u, v) samples the ray through (u, v) exactly,
/// so the principal point (cx, cy) maps to the optical axis.
struct CameraIntrinsics {
  double fx = 0;
  double fy = 0;
  double cx = 0;
  double cy = 0;
  int width = 0;
  int height = 0;

  CameraIntrinsics() = default;
  CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, int w, int h)
      : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(w), height(h) {
    validate();
  }

  void validate() const {
    if (!(fx > 0) || !(fy > 0)) throw ConfigError("intrinsics: focal lengths must be positive");
    if (width < 1 || height < 1) throw ConfigError("intrinsics: image dimensions must be >= 1");
    if (!(cx >= 0 && cx < width) || !(cy >= 0 && cy < height))
      throw ConfigError("intrinsics: principal point outside image");
  }
};

/// Rigid world-to-camera transform: x_cam = rotation * x_world + translation.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Pose() = default;
  Pose(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) : rotation(r), translation(t) {
    validate();
  }

  void validate(double tol = 1e-6) const;

  Pose inverse() const { return make_unchecked(rotation.transpose(), -(rotation.transpose() * translation)); }

  Eigen::Vector3d apply(const Eigen::Vector3d& p_world) const { return rotation * p_world + translation; }

  Eigen::Vector3d camera_center() const { return -(rotation.transpose() * translation); }

  /// Skips the orthonormality check; for internal compositions of already-valid poses.
  static Pose make_unchecked(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
    Pose p;
    p.rotation = r;
    p.translation = t;
    return p;
  }
};

/// T_{n->i}: maps camera-n coordinates into camera-i coordinates.
Pose relative_transform(const Pose& pose_n, const Pose& pose_i);

template <typename S>
Eigen::Matrix<S, 3, 1> unproject_pixel(S u, S v, S z, const CameraIntrinsics& k) {
  if (!(z > S(0))) throw DataError("unproject_pixel: non-positive depth");
  if (!(u >= S(0) && u < S(k.width) && v >= S(0) && v < S(k.height)))
    throw DataError("unproject_pixel: pixel out of bounds");
  return {(u - S(k.cx)) * z / S(k.fx), (v - S(k.cy)) * z / S(k.fy), z};
}

/// Pixel-space projection result; out-of-frustum is a value, not an error.
template <typename S>
struct Projection {
  bool in_frustum = false;
  S u = S(0);
  S v = S(0);
  S depth = S(0);
};

template <typename S>
Projection<S> project_point(const Eigen::Matrix<S, 3, 1>& p, const CameraIntrinsics& k) {
  Projection<S> out;
  if (!(p.z() > S(0))) return out;
  const S u = S(k.fx) * p.x() / p.z() + S(k.cx);
  const S v = S(k.fy) * p.y() / p.z() + S(k.cy);
  if (!(u >= S(0) && u < S(k.width) && v >= S(0) && v < S(k.height))) return out;
  out.in_frustum = true;
  out.u = u;
  out.v = v;
  out.depth = p.z();
  return out;
}

}  // namespace scenefill
