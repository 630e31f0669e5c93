#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scenefill/camera.hpp"
#include "scenefill/image.hpp"

namespace scenefill::io {

/// Grayscale PFM, one float32 per pixel, rows stored bottom-up. A negative
/// scale marks little-endian payload; we write scale -1.0. Round trips are
/// bit-exact.
GridF pfm_read(const std::filesystem::path& path);
void pfm_write(const std::filesystem::path& path, const GridF& grid);

/// Binary PGM (P5), maxval 255.
GridU8 pgm_read(const std::filesystem::path& path);
void pgm_write(const std::filesystem::path& path, const GridU8& gray);

/// Binary PPM (P6), maxval 255.
RgbImage ppm_read(const std::filesystem::path& path);
void ppm_write(const std::filesystem::path& path, const RgbImage& img);

/// Mask convention: 0 = background, 255 = foreground.
BinaryMask mask_read_pgm(const std::filesystem::path& path);
void mask_write_pgm(const std::filesystem::path& path, const BinaryMask& mask);

/// Binarizes gray at 128; reports whether intermediate gray values were seen.
BinaryMask mask_from_gray(const GridU8& gray, bool* had_intermediate = nullptr);
GridU8 gray_from_mask(const BinaryMask& mask);

struct PlyVertex {
  double x, y, z;
  std::uint8_t red, green, blue;
};

/// ASCII PLY with x y z red green blue per vertex; coordinates printed with
/// 9 significant digits.
void ply_write(const std::filesystem::path& path, const std::vector<PlyVertex>& vertices);
std::vector<PlyVertex> ply_read(const std::filesystem::path& path);

struct ViewEntry {
  std::string id;
  CameraIntrinsics intrinsics;
  Pose pose;  // world-to-camera
};

/// cameras.json: {"views": [{id, intrinsics{fx,fy,cx,cy,width,height},
/// world_to_camera: [16 row-major]}...]}
std::vector<ViewEntry> cameras_read(const std::filesystem::path& path);
void cameras_write(const std::filesystem::path& path, const std::vector<ViewEntry>& views);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace scenefill::io
