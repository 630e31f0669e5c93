#pragma once

#include <filesystem>
#include <vector>

#include "scenefill/camera.hpp"
#include "scenefill/image.hpp"

namespace scenefill::unproject {

struct ColoredPoint {
  Eigen::Vector3d position;  // world frame
  std::uint8_t r, g, b;
};

struct PointSet {
  std::vector<ColoredPoint> points;
};

/// Lifts every u_final pixel of the reference view into a world-frame colored
/// point. Ordering is row-major over the mask. Throws if any unseen pixel has
/// invalid (zero) aligned depth, listing the offenders.
PointSet init_points(const RgbImage& rgb_ref, const DepthMap& d_aligned, const BinaryMask& u_final,
                     const CameraIntrinsics& k, const Pose& pose_ref);

void export_ply(const PointSet& ps, const std::filesystem::path& path);
PointSet import_ply(const std::filesystem::path& path);

}  // namespace scenefill::unproject
