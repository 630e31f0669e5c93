#include "scenefill/unproject.hpp"

#include "scenefill/io.hpp"

namespace scenefill::unproject {

PointSet init_points(const RgbImage& rgb_ref, const DepthMap& d_aligned, const BinaryMask& u_final,
                     const CameraIntrinsics& k, const Pose& pose_ref) {
  if (rgb_ref.width() != k.width || rgb_ref.height() != k.height ||
      !same_shape(d_aligned.values, u_final.values) || d_aligned.width() != k.width ||
      d_aligned.height() != k.height)
    throw DimensionError("init_points: grids inconsistent with intrinsics");

  std::string missing;
  int missing_count = 0;
  for (int v = 0; v < k.height; ++v)
    for (int u = 0; u < k.width; ++u)
      if (u_final.values(v, u) == 1 && !(d_aligned.values(v, u) > 0.0f)) {
        if (missing_count < 8)
          missing += " (" + std::to_string(u) + "," + std::to_string(v) + ")";
        ++missing_count;
      }
  if (missing_count > 0)
    throw DataError("init_points: " + std::to_string(missing_count) +
                    " unseen pixels with invalid depth:" + missing);

  const Pose cam_to_world = pose_ref.inverse();
  PointSet ps;
  ps.points.reserve(static_cast<std::size_t>(u_final.count()));
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      if (u_final.values(v, u) == 0) continue;
      const double z = d_aligned.values(v, u);
      const Eigen::Vector3d p_cam = unproject_pixel<double>(u, v, z, k);
      ColoredPoint cp;
      cp.position = cam_to_world.apply(p_cam);
      cp.r = rgb_ref.r(v, u);
      cp.g = rgb_ref.g(v, u);
      cp.b = rgb_ref.b(v, u);
      ps.points.push_back(cp);
    }
  }
  return ps;
}

void export_ply(const PointSet& ps, const std::filesystem::path& path) {
  std::vector<io::PlyVertex> verts;
  verts.reserve(ps.points.size());
  for (const ColoredPoint& p : ps.points)
    verts.push_back({p.position.x(), p.position.y(), p.position.z(), p.r, p.g, p.b});
  io::ply_write(path, verts);
}

PointSet import_ply(const std::filesystem::path& path) {
  PointSet ps;
  for (const io::PlyVertex& v : io::ply_read(path)) {
    ColoredPoint p;
    p.position = {v.x, v.y, v.z};
    p.r = v.red;
    p.g = v.green;
    p.b = v.blue;
    ps.points.push_back(p);
  }
  return ps;
}

}  // namespace scenefill::unproject
