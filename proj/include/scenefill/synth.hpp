#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scenefill/camera.hpp"
#include "scenefill/image.hpp"
#include "scenefill/io.hpp"

namespace scenefill::synth {

struct Primitive {
  enum class Kind { kGroundPlane, kBox, kSphere };
  Kind kind = Kind::kBox;
  bool is_object = false;
  std::array<std::uint8_t, 3> color{200, 200, 200};

  double plane_height = 0.0;             // kGroundPlane: z = plane_height
  Eigen::Vector3d box_min{0, 0, 0};      // kBox
  Eigen::Vector3d box_max{0, 0, 0};
  Eigen::Vector3d sphere_center{0, 0, 0};  // kSphere
  double sphere_radius = 0.0;
};

struct ViewDef {
  std::string id;
  CameraIntrinsics intrinsics;
  Pose pose;  // world-to-camera
};

struct SceneSpec {
  std::vector<Primitive> primitives;
  std::vector<ViewDef> views;

  void validate() const;
};

/// World-to-camera pose with the camera at `center` looking at `target`,
/// x right, y down (world +z is up).
Pose look_at(const Eigen::Vector3d& center, const Eigen::Vector3d& target);

/// Evenly spaced cameras on a circle of the given radius and height, all
/// looking at the target point.
std::vector<ViewDef> camera_ring(int count, double radius, double height,
                                 const Eigen::Vector3d& target, const CameraIntrinsics& k);

struct Hit {
  bool valid = false;
  double depth = 0.0;  // camera z-depth of the hit
  int primitive = -1;
};

/// Nearest exact ray-primitive intersection for the pixel-center ray of (u, v).
Hit cast_pixel_ray(const ViewDef& view, const SceneSpec& scene, double u, double v,
                   bool include_objects);

/// Per-pixel nearest-hit z-depth; 0 where nothing is hit.
DepthMap render_depth(const ViewDef& view, const SceneSpec& scene, bool include_objects);

/// 1 where the first hit (objects included) is an object primitive.
BinaryMask object_mask(const ViewDef& view, const SceneSpec& scene);

/// Flat-shaded render; pixels with no hit are black.
RgbImage render_rgb(const ViewDef& view, const SceneSpec& scene, bool include_objects);

/// True if `point` is visible from the view: inside the frustum and not
/// blocked by any object primitive along the open segment to the camera.
bool point_visible(const Eigen::Vector3d& point, const ViewDef& view, const SceneSpec& scene);

/// Unseen-region oracle: pixels of view_n inside its removal footprint whose
/// revealed background point is object-occluded (or out of frustum) in every
/// other view.
BinaryMask gt_unseen(const ViewDef& view_n, const std::vector<ViewDef>& all_views,
                     const SceneSpec& scene);

/// Scene document: primitives plus either explicit views or a camera ring.
SceneSpec scene_from_json_text(const std::string& text);
SceneSpec scene_read(const std::filesystem::path& path);

/// Materializes cameras.json, depth/ (with objects), depth_incomplete/,
/// depth_background/, masks/ (object masks), rgb/ (object-free render),
/// rgb_full/ and gt_unseen/ under out_dir.
void write_dataset(const SceneSpec& scene, const std::filesystem::path& out_dir);

/// The default acceptance scene: 1 m box on an infinite plane, camera ring.
SceneSpec default_ring_scene(int views = 8, int image_size = 128);

}  // namespace scenefill::synth
