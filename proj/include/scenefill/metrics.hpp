#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scenefill/image.hpp"

namespace scenefill::metrics {

inline constexpr double kPsnrCap = 99.0;  // identical images report 99 dB

/// 10*log10(max_val^2 / MSE) with MSE averaged over channels and mask pixels.
double psnr_masked(const RgbImage& a, const RgbImage& b, const BinaryMask& mask, double max_val);

/// psnr_masked over the complement of object_mask.
double psnr_outside_mask(const RgbImage& a, const RgbImage& b, const BinaryMask& object_mask,
                         double max_val);

/// Mean absolute depth difference over the mask; both depths must be valid there.
double mad(const DepthMap& d_a, const DepthMap& d_b, const BinaryMask& mask);

/// Population variance of the 4-neighbor Laplacian over interior pixels.
double variance_of_laplacian(const GridD& img);

/// Luma conversion for the sharpness metric: 0.299 r + 0.587 g + 0.114 b.
GridD luma(const RgbImage& img);

double mask_iou(const BinaryMask& a, const BinaryMask& b);

struct MetricRecord {
  std::string view_id;
  std::string metric;
  std::string mask;
  double value = 0.0;
  std::int64_t pixels = 0;
};

struct MetricReport {
  std::vector<MetricRecord> records;

  void add(const MetricRecord& r);
  /// Pixel-count-weighted means per (metric, mask) pair.
  std::vector<MetricRecord> aggregates() const;
  /// {"records": [...], "aggregate": [...], "unavailable": ["lpips", "ssim"]}
  std::string to_json() const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace scenefill::metrics
