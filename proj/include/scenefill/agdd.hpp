#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scenefill/image.hpp"
#include "scenefill/schedule.hpp"

namespace scenefill::agdd {

/// Affine map between raw depth and the prior's normalized [-1, 1] range.
/// normalized = scale * raw + shift.
struct NormalizationParams {
  double scale = 1.0;
  double shift = 0.0;
  double p2 = 0.0;   // raw depth mapped to -1
  double p98 = 0.0;  // raw depth mapped to +1

  double normalize(double raw) const { return scale * raw + shift; }
  double unnormalize(double normalized) const { return (normalized - shift) / scale; }
  GridD normalize_grid(const GridD& raw, bool clamp) const;
  GridD unnormalize_grid(const GridD& normalized) const;
};

struct NormalizedDepth {
  GridD values;  // clamped to [-1, 1]
  NormalizationParams params;
};

/// Maps the 2nd/98th percentile of the valid depths to -1/+1 and clamps the
/// tails. Percentiles use linear interpolation over the sorted valid sample.
NormalizedDepth normalize_depth(const DepthMap& d);

enum class GuideRegionMode { kBBoxMinusUnseen, kDilateMinusUnseen };

inline const char* to_string(GuideRegionMode m) {
  return m == GuideRegionMode::kBBoxMinusUnseen ? "bbox_minus_u" : "dilate_minus_u";
}
GuideRegionMode guide_region_mode_from_string(const std::string& s);

struct AgddConfig {
  double alpha = 2.5;          // guidance learning rate
  int inner_iters = 8;         // N noise refinements per timestep
  double delta = 0.35;         // Huber threshold, normalized-depth units
  int bbox_margin = 16;        // pixels added around bbox(U) to form B
  int steps = 50;              // schedule length T
  double beta_min = 1e-4;
  double beta_max = 2e-2;
  std::uint64_t seed = 0;
  GuideRegionMode guide_region_mode = GuideRegionMode::kBBoxMinusUnseen;

  void validate() const {
    if (alpha < 0) throw ConfigError("agdd: alpha must be >= 0");
    if (inner_iters < 1) throw ConfigError("agdd: inner_iters must be >= 1");
    if (!(delta > 0)) throw ConfigError("agdd: delta must be > 0");
    if (bbox_margin < 0) throw ConfigError("agdd: bbox_margin must be >= 0");
    if (steps < 1) throw ConfigError("agdd: steps must be >= 1");
  }
};

/// Depth prior driving the guided denoising loop. Operates in normalized depth
/// space; decode() is the identity unless a latent-space prior overrides it.
class DepthPrior {
 public:
  virtual ~DepthPrior() = default;
  virtual GridD predict_noise(const GridD& d_t, int t, const DiffusionSchedule& sched) const = 0;
  virtual GridD decode(const GridD& clean_estimate) const { return clean_estimate; }
};

/// Test prior with a known normalized-space target. Above track_below_t it
/// predicts the exact noise steering the deterministic trajectory onto the
/// target; at and below it predicts zero noise (trusts the state), which lets
/// guidance corrections persist the way a learned model would. With
/// track_below_t = 0 (default) it is a pure steering oracle and the unguided
/// trajectory lands exactly on the target.
class OraclePrior : public DepthPrior {
 public:
  OraclePrior(GridD target_normalized, int track_below_t = 0)
      : target_(std::move(target_normalized)), track_below_t_(track_below_t) {}

  /// Builds the normalized target gamma * raw + beta mapped by params
  /// (no clamping, so the target unnormalizes exactly), plus an optional
  /// additive low-frequency bias field in normalized units.
  static OraclePrior from_raw_target(const DepthMap& target_raw, const NormalizationParams& params,
                                     double gamma = 1.0, double beta = 0.0,
                                     const GridD* bias_normalized = nullptr, int track_below_t = 0);

  GridD predict_noise(const GridD& d_t, int t, const DiffusionSchedule& sched) const override;

  const GridD& target() const { return target_; }
  int track_below_t() const { return track_below_t_; }

 private:
  GridD target_;
  int track_below_t_ = 0;
};

/// Eq. 6 guide mask: 1 exactly on pixels inside b with u = 0.
BinaryMask guide_mask(const BinaryMask& u, const BBox& b);

struct LossResult {
  double loss = 0.0;
  GridD gradient;  // dL/d(d_est), zero off the guide mask
};

/// Huber data term summed over the guide mask: 1/2 r^2 below delta,
/// delta*|r| - delta^2/2 above. Gradient magnitude never exceeds delta.
LossResult adaptive_loss(const GridD& d_est, const GridD& d_inc, const BinaryMask& m_guide,
                         double delta);

/// Plain 1/2 r^2 with no cap; the over-alignment-prone baseline.
LossResult l2_loss(const GridD& d_est, const GridD& d_inc, const BinaryMask& m_guide);

/// d0_hat = (d_t - sqrt(1 - abar_t) * eps_hat) / sqrt(abar_t)
GridD predicted_clean(const GridD& d_t, const GridD& eps_hat, int t, const DiffusionSchedule& sched);

enum class GuidanceLoss { kAdaptiveHuber, kL2 };

/// One guided denoising step t -> t-1. Predicts noise once, refines it
/// inner_iters times with the loss gradient pulled back through the decoder
/// (identity: dD/d_eps = -sqrt(1-abar)/sqrt(abar)), then applies one
/// deterministic DDIM update. pre_refinement_loss, when given, receives the
/// loss of the unrefined prediction.
GridD agdd_step(const GridD& d_t, int t, const DepthPrior& prior, const GridD& d_inc_normalized,
                const BinaryMask& m_guide, const AgddConfig& cfg, const DiffusionSchedule& sched,
                GuidanceLoss loss = GuidanceLoss::kAdaptiveHuber,
                double* pre_refinement_loss = nullptr);

struct AlignmentResult {
  DepthMap aligned;
  std::vector<double> loss_trace;  // pre-refinement loss per outer step, t = T..1
  BBox region;                     // B
  BinaryMask guide;                // final guide mask (validity-intersected)
  NormalizationParams params;
};

/// Full guided run: normalizes d_incomplete, forms B around the unseen mask,
/// starts from seeded unit Gaussian noise and denoises t = T..1 with guidance.
AlignmentResult agdd_run(const DepthPrior& prior, const DepthMap& d_incomplete, const BinaryMask& u,
                         const AgddConfig& cfg, const DiffusionSchedule& sched, std::uint64_t seed);

/// Same loop with the uncapped L2 data term.
AlignmentResult l2_guided_run(const DepthPrior& prior, const DepthMap& d_incomplete,
                              const BinaryMask& u, const AgddConfig& cfg,
                              const DiffusionSchedule& sched, std::uint64_t seed);

struct ScaleShiftResult {
  double gamma = 1.0;
  double beta = 0.0;
  DepthMap aligned;
};

/// Closed-form least squares for gamma * d_est + beta ~= d_inc over the mask.
ScaleShiftResult scale_shift_align(const DepthMap& d_est, const DepthMap& d_inc,
                                   const BinaryMask& mask);

}  // namespace scenefill::agdd
