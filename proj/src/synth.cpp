#include "scenefill/synth.hpp"

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

namespace scenefill::synth {

namespace {

constexpr double kRayEps = 1e-6;  // self-intersection guard

using json = nlohmann::json;

// Nearest positive intersection parameter along origin + s * dir, or nullopt.
std::optional<double> intersect(const Primitive& p, const Eigen::Vector3d& origin,
                                const Eigen::Vector3d& dir, double min_s) {
  switch (p.kind) {
    case Primitive::Kind::kGroundPlane: {
      if (std::abs(dir.z()) < 1e-15) return std::nullopt;
      const double s = (p.plane_height - origin.z()) / dir.z();
      if (s <= min_s) return std::nullopt;
      return s;
    }
    case Primitive::Kind::kBox: {
      double lo = min_s, hi = std::numeric_limits<double>::infinity();
      for (int a = 0; a < 3; ++a) {
        if (std::abs(dir(a)) < 1e-15) {
          if (origin(a) < p.box_min(a) || origin(a) > p.box_max(a)) return std::nullopt;
          continue;
        }
        double s0 = (p.box_min(a) - origin(a)) / dir(a);
        double s1 = (p.box_max(a) - origin(a)) / dir(a);
        if (s0 > s1) std::swap(s0, s1);
        lo = std::max(lo, s0);
        hi = std::min(hi, s1);
        if (lo > hi) return std::nullopt;
      }
      if (lo > min_s && std::isfinite(lo)) return lo;
      return std::nullopt;  // origin inside the box or box behind
    }
    case Primitive::Kind::kSphere: {
      const Eigen::Vector3d oc = origin - p.sphere_center;
      const double a = dir.squaredNorm();
      const double b = 2.0 * oc.dot(dir);
      const double c = oc.squaredNorm() - p.sphere_radius * p.sphere_radius;
      const double disc = b * b - 4 * a * c;
      if (disc < 0) return std::nullopt;
      const double sq = std::sqrt(disc);
      const double s0 = (-b - sq) / (2 * a);
      const double s1 = (-b + sq) / (2 * a);
      if (s0 > min_s) return s0;
      if (s1 > min_s) return s1;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

struct WorldRay {
  Eigen::Vector3d origin;
  Eigen::Vector3d dir;  // scaled so the ray parameter equals camera z-depth
};

WorldRay pixel_ray(const ViewDef& view, double u, double v) {
  const Eigen::Vector3d dir_cam((u - view.intrinsics.cx) / view.intrinsics.fx,
                                (v - view.intrinsics.cy) / view.intrinsics.fy, 1.0);
  WorldRay r;
  r.origin = view.pose.camera_center();
  r.dir = view.pose.rotation.transpose() * dir_cam;
  return r;
}

Hit nearest_hit(const SceneSpec& scene, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                bool include_objects, double min_s) {
  Hit best;
  double best_s = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const Primitive& p = scene.primitives[i];
    if (!include_objects && p.is_object) continue;
    const auto s = intersect(p, origin, dir, min_s);
    if (s && *s < best_s) {
      best_s = *s;
      best.valid = true;
      best.depth = *s;
      best.primitive = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

void SceneSpec::validate() const {
  bool has_background = false, has_object = false;
  for (const Primitive& p : primitives) {
    (p.is_object ? has_object : has_background) = true;
    if (p.kind == Primitive::Kind::kBox && ((p.box_max - p.box_min).array() <= 0).any())
      throw ConfigError("scene: box with non-positive extent");
    if (p.kind == Primitive::Kind::kSphere && !(p.sphere_radius > 0))
      throw ConfigError("scene: sphere with non-positive radius");
  }
  if (!has_background) throw ConfigError("scene: needs at least one background surface");
  if (!has_object) throw ConfigError("scene: needs at least one object primitive");
  if (views.empty()) throw ConfigError("scene: needs at least one view");
  for (const ViewDef& v : views) {
    const auto proj = project_point<double>(v.pose.apply(Eigen::Vector3d::Zero()), v.intrinsics);
    if (!proj.in_frustum) throw ConfigError("scene: view '" + v.id + "' does not see the origin");
  }
}

Pose look_at(const Eigen::Vector3d& center, const Eigen::Vector3d& target) {
  const Eigen::Vector3d forward = (target - center).normalized();
  Eigen::Vector3d up_world(0, 0, 1);
  if (std::abs(forward.dot(up_world)) > 0.999) up_world = Eigen::Vector3d(0, 1, 0);
  const Eigen::Vector3d right = forward.cross(up_world).normalized();
  const Eigen::Vector3d down = forward.cross(right);
  Eigen::Matrix3d r;
  r.row(0) = right;
  r.row(1) = down;
  r.row(2) = forward;
  return Pose(r, -(r * center));
}

std::vector<ViewDef> camera_ring(int count, double radius, double height,
                                 const Eigen::Vector3d& target, const CameraIntrinsics& k) {
  if (count < 1) throw ConfigError("camera_ring: count must be >= 1");
  std::vector<ViewDef> views;
  views.reserve(static_cast<std::size_t>(count));
  char id[32];
  for (int i = 0; i < count; ++i) {
    const double angle = 2.0 * M_PI * double(i) / double(count);
    const Eigen::Vector3d center(radius * std::cos(angle), radius * std::sin(angle), height);
    std::snprintf(id, sizeof(id), "view_%03d", i);
    views.push_back({id, k, look_at(center, target)});
  }
  return views;
}

Hit cast_pixel_ray(const ViewDef& view, const SceneSpec& scene, double u, double v,
                   bool include_objects) {
  const WorldRay ray = pixel_ray(view, u, v);
  return nearest_hit(scene, ray.origin, ray.dir, include_objects, kRayEps);
}

DepthMap render_depth(const ViewDef& view, const SceneSpec& scene, bool include_objects) {
  const int h = view.intrinsics.height, w = view.intrinsics.width;
  GridF depth = GridF::Zero(h, w);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const Hit hit = cast_pixel_ray(view, scene, u, v, include_objects);
      if (hit.valid) depth(v, u) = static_cast<float>(hit.depth);
    }
  return DepthMap{std::move(depth)};
}

BinaryMask object_mask(const ViewDef& view, const SceneSpec& scene) {
  const int h = view.intrinsics.height, w = view.intrinsics.width;
  BinaryMask mask = BinaryMask::zeros(h, w);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const Hit hit = cast_pixel_ray(view, scene, u, v, true);
      if (hit.valid && scene.primitives[static_cast<std::size_t>(hit.primitive)].is_object)
        mask.values(v, u) = 1;
    }
  return mask;
}

RgbImage render_rgb(const ViewDef& view, const SceneSpec& scene, bool include_objects) {
  const int h = view.intrinsics.height, w = view.intrinsics.width;
  RgbImage img = RgbImage::filled(h, w, 0, 0, 0);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const Hit hit = cast_pixel_ray(view, scene, u, v, include_objects);
      if (!hit.valid) continue;
      const auto& c = scene.primitives[static_cast<std::size_t>(hit.primitive)].color;
      img.r(v, u) = c[0];
      img.g(v, u) = c[1];
      img.b(v, u) = c[2];
    }
  return img;
}

bool point_visible(const Eigen::Vector3d& point, const ViewDef& view, const SceneSpec& scene) {
  const auto proj = project_point<double>(view.pose.apply(point), view.intrinsics);
  if (!proj.in_frustum) return false;
  const Eigen::Vector3d cam = view.pose.camera_center();
  const Eigen::Vector3d dir = cam - point;  // parameter 1 reaches the camera
  for (const Primitive& p : scene.primitives) {
    if (!p.is_object) continue;
    const auto s = intersect(p, point, dir, kRayEps);
    if (s && *s < 1.0 - kRayEps) return false;
  }
  return true;
}

BinaryMask gt_unseen(const ViewDef& view_n, const std::vector<ViewDef>& all_views,
                     const SceneSpec& scene) {
  bool found = false;
  for (const ViewDef& v : all_views) found = found || (v.id == view_n.id);
  if (!found) throw ConfigError("gt_unseen: view_n must be one of all_views");

  const int h = view_n.intrinsics.height, w = view_n.intrinsics.width;
  BinaryMask out = BinaryMask::zeros(h, w);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const Hit full = cast_pixel_ray(view_n, scene, u, v, true);
      const bool removal =
          full.valid && scene.primitives[static_cast<std::size_t>(full.primitive)].is_object;
      if (!removal) continue;
      const Hit bg = cast_pixel_ray(view_n, scene, u, v, false);
      if (!bg.valid) continue;  // nothing behind the object along this ray
      const WorldRay ray = pixel_ray(view_n, u, v);
      const Eigen::Vector3d revealed = ray.origin + bg.depth * ray.dir;
      bool seen_elsewhere = false;
      for (const ViewDef& other : all_views) {
        if (other.id == view_n.id) continue;
        if (point_visible(revealed, other, scene)) {
          seen_elsewhere = true;
          break;
        }
      }
      if (!seen_elsewhere) out.values(v, u) = 1;
    }
  }
  return out;
}

namespace {

std::array<std::uint8_t, 3> color_from_json(const json& j, std::array<std::uint8_t, 3> fallback) {
  if (!j.contains("color")) return fallback;
  const auto& c = j["color"];
  if (!c.is_array() || c.size() != 3) throw ConfigError("scene: color must be [r, g, b]");
  return {c[0].get<std::uint8_t>(), c[1].get<std::uint8_t>(), c[2].get<std::uint8_t>()};
}

Eigen::Vector3d vec3_from_json(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
    throw ConfigError(std::string("scene: expected 3-vector '") + key + "'");
  return {j[key][0].get<double>(), j[key][1].get<double>(), j[key][2].get<double>()};
}

}  // namespace

SceneSpec scene_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("bad-json", e.byte, e.what());
  }
  SceneSpec scene;
  if (doc.contains("ground_plane")) {
    Primitive p;
    p.kind = Primitive::Kind::kGroundPlane;
    p.is_object = false;
    p.plane_height = doc["ground_plane"].value("height", 0.0);
    p.color = color_from_json(doc["ground_plane"], {110, 110, 110});
    scene.primitives.push_back(p);
  }
  for (const auto& pj : doc.value("primitives", json::array())) {
    Primitive p;
    const std::string type = pj.value("type", "");
    const std::string role = pj.value("role", "object");
    if (role != "object" && role != "background")
      throw ConfigError("scene: primitive role must be 'object' or 'background'");
    p.is_object = role == "object";
    p.color = color_from_json(pj, {200, 60, 60});
    if (type == "box") {
      p.kind = Primitive::Kind::kBox;
      p.box_min = vec3_from_json(pj, "min");
      p.box_max = vec3_from_json(pj, "max");
    } else if (type == "sphere") {
      p.kind = Primitive::Kind::kSphere;
      p.sphere_center = vec3_from_json(pj, "center");
      p.sphere_radius = pj.value("radius", 0.0);
    } else {
      throw ConfigError("scene: unknown primitive type '" + type + "'");
    }
    scene.primitives.push_back(p);
  }

  if (doc.contains("ring")) {
    const auto& r = doc["ring"];
    const int count = r.value("count", 8);
    const int size = r.value("image_size", 128);
    const double focal = r.value("focal", 0.9 * size);
    const CameraIntrinsics k(focal, focal, (size - 1) / 2.0, (size - 1) / 2.0, size, size);
    Eigen::Vector3d target(0, 0, 0);
    if (r.contains("target")) target = vec3_from_json(r, "target");
    scene.views =
        camera_ring(count, r.value("radius", 4.0), r.value("height", 2.0), target, k);
  }
  for (const auto& vj : doc.value("views", json::array())) {
    ViewDef v;
    v.id = vj.at("id").get<std::string>();
    const auto& k = vj.at("intrinsics");
    v.intrinsics = CameraIntrinsics(k.at("fx").get<double>(), k.at("fy").get<double>(),
                                    k.at("cx").get<double>(), k.at("cy").get<double>(),
                                    k.at("width").get<int>(), k.at("height").get<int>());
    const auto& m = vj.at("world_to_camera");
    if (!m.is_array() || m.size() != 16)
      throw ConfigError("scene: world_to_camera must have 16 entries");
    Eigen::Matrix3d rot;
    Eigen::Vector3d t;
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) rot(row, col) = m[4 * row + col].get<double>();
      t(row) = m[4 * row + 3].get<double>();
    }
    v.pose = Pose(rot, t);
    scene.views.push_back(std::move(v));
  }
  scene.validate();
  return scene;
}

SceneSpec scene_read(const std::filesystem::path& path) {
  return scene_from_json_text(io::read_file(path));
}

void write_dataset(const SceneSpec& scene, const std::filesystem::path& out_dir) {
  scene.validate();
  namespace fs = std::filesystem;
  for (const char* sub :
       {"depth", "depth_incomplete", "depth_background", "masks", "rgb", "rgb_full", "gt_unseen"})
    fs::create_directories(out_dir / sub);

  std::vector<io::ViewEntry> entries;
  for (const ViewDef& v : scene.views) entries.push_back({v.id, v.intrinsics, v.pose});
  io::cameras_write(out_dir / "cameras.json", entries);

  for (const ViewDef& v : scene.views) {
    const DepthMap d_full = render_depth(v, scene, true);
    const DepthMap d_bg = render_depth(v, scene, false);
    const BinaryMask unseen = gt_unseen(v, scene.views, scene);

    // Incomplete depth: the object-free render with the never-observed
    // background zeroed out, the way a reconstruction with deleted objects
    // would render it.
    GridF inc = d_bg.values;
    for (int row = 0; row < unseen.height(); ++row)
      for (int col = 0; col < unseen.width(); ++col)
        if (unseen.values(row, col) == 1) inc(row, col) = 0.0f;

    io::pfm_write(out_dir / "depth" / (v.id + ".pfm"), d_full.values);
    io::pfm_write(out_dir / "depth_incomplete" / (v.id + ".pfm"), inc);
    io::pfm_write(out_dir / "depth_background" / (v.id + ".pfm"), d_bg.values);
    io::mask_write_pgm(out_dir / "masks" / (v.id + ".pgm"), object_mask(v, scene));
    io::ppm_write(out_dir / "rgb" / (v.id + ".ppm"), render_rgb(v, scene, false));
    io::ppm_write(out_dir / "rgb_full" / (v.id + ".ppm"), render_rgb(v, scene, true));
    io::mask_write_pgm(out_dir / "gt_unseen" / (v.id + ".pgm"), unseen);
  }
}

SceneSpec default_ring_scene(int views, int image_size) {
  SceneSpec scene;
  Primitive ground;
  ground.kind = Primitive::Kind::kGroundPlane;
  ground.is_object = false;
  ground.plane_height = 0.0;
  ground.color = {110, 110, 110};
  scene.primitives.push_back(ground);

  Primitive box;
  box.kind = Primitive::Kind::kBox;
  box.is_object = true;
  box.box_min = {-0.5, -0.5, 0.0};
  box.box_max = {0.5, 0.5, 1.0};
  box.color = {200, 60, 60};
  scene.primitives.push_back(box);

  const double focal = 0.9 * image_size;
  const CameraIntrinsics k(focal, focal, (image_size - 1) / 2.0, (image_size - 1) / 2.0, image_size,
                           image_size);
  scene.views = camera_ring(views, 4.0, 2.0, Eigen::Vector3d::Zero(), k);
  scene.validate();
  return scene;
}

}  // namespace scenefill::synth
