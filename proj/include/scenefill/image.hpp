#pragma once

#include <cstdint>

#include "scenefill/error.hpp"
#include "scenefill/grid.hpp"

namespace scenefill {

/// Dense depth grid in scene units; invalid pixels are encoded as 0.
struct DepthMap {
  GridF values;

  DepthMap() = default;
  explicit DepthMap(GridF v) : values(std::move(v)) {
    if ((values < 0.0f).any()) throw DataError("depth map: negative values");
  }
  static DepthMap zeros(int height, int width) { return DepthMap{GridF::Zero(height, width)}; }

  int width() const { return static_cast<int>(values.cols()); }
  int height() const { return static_cast<int>(values.rows()); }
  bool valid_at(int v, int u) const { return values(v, u) > 0.0f; }
};

/// Strictly {0, 1} valued grid.
struct BinaryMask {
  GridU8 values;

  BinaryMask() = default;
  explicit BinaryMask(GridU8 v) : values(std::move(v)) {
    if ((values > 1).any()) throw DataError("binary mask: values must be 0 or 1");
  }
  static BinaryMask zeros(int height, int width) { return BinaryMask{GridU8::Zero(height, width)}; }

  int width() const { return static_cast<int>(values.cols()); }
  int height() const { return static_cast<int>(values.rows()); }
  std::int64_t count() const { return values.template cast<std::int64_t>().sum(); }
  bool empty() const { return count() == 0; }
};

/// 8-bit RGB image, planar channels.
struct RgbImage {
  GridU8 r, g, b;

  RgbImage() = default;
  RgbImage(GridU8 r_, GridU8 g_, GridU8 b_) : r(std::move(r_)), g(std::move(g_)), b(std::move(b_)) {
    if (!same_shape(r, g) || !same_shape(g, b)) throw DimensionError("rgb image: channel shape mismatch");
  }
  static RgbImage filled(int height, int width, std::uint8_t cr, std::uint8_t cg, std::uint8_t cb) {
    return {GridU8::Constant(height, width, cr), GridU8::Constant(height, width, cg),
            GridU8::Constant(height, width, cb)};
  }

  int width() const { return static_cast<int>(r.cols()); }
  int height() const { return static_cast<int>(r.rows()); }
};

/// Per-pixel fraction of views voting "unseen"; values in [0, 1].
struct VoteGrid {
  GridF values;

  VoteGrid() = default;
  explicit VoteGrid(GridF v) : values(std::move(v)) {
    if ((values < 0.0f).any() || (values > 1.0f).any())
      throw DataError("vote grid: values outside [0, 1]");
  }
  static VoteGrid zeros(int height, int width) { return VoteGrid{GridF::Zero(height, width)}; }

  int width() const { return static_cast<int>(values.cols()); }
  int height() const { return static_cast<int>(values.rows()); }
};

/// Inclusive integer pixel bounds.
struct BBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  void validate(int width, int height) const {
    if (x_min > x_max || y_min > y_max) throw DataError("bbox: empty extent");
    if (x_min < 0 || y_min < 0 || x_max >= width || y_max >= height)
      throw DataError("bbox: outside image bounds");
  }
  bool contains(int x, int y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
  int width() const { return x_max - x_min + 1; }
  int height() const { return y_max - y_min + 1; }
};

inline BinaryMask valid_mask(const DepthMap& d) {
  return BinaryMask{(d.values > 0.0f).template cast<std::uint8_t>()};
}

}  // namespace scenefill
