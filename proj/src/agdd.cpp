#include "scenefill/agdd.hpp"

#include <algorithm>
#include <cmath>

#include "scenefill/morphology.hpp"
#include "scenefill/random.hpp"
#include "scenefill/warpmask.hpp"

namespace scenefill::agdd {

GridD NormalizationParams::normalize_grid(const GridD& raw, bool clamp) const {
  GridD out = scale * raw + shift;
  if (clamp) out = out.min(1.0).max(-1.0);
  return out;
}

GridD NormalizationParams::unnormalize_grid(const GridD& normalized) const {
  return (normalized - shift) / scale;
}

namespace {

double percentile_linear(std::vector<float>& sorted, double p) {
  const double rank = p / 100.0 * double(sorted.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(rank));
  const double frac = rank - double(i);
  const std::size_t j = std::min(i + 1, sorted.size() - 1);
  return double(sorted[i]) * (1.0 - frac) + double(sorted[j]) * frac;
}

}  // namespace

NormalizedDepth normalize_depth(const DepthMap& d) {
  std::vector<float> vals;
  vals.reserve(static_cast<std::size_t>(d.values.size()));
  for (long i = 0; i < d.values.size(); ++i)
    if (d.values.data()[i] > 0.0f) vals.push_back(d.values.data()[i]);
  if (vals.size() < 2) throw DataError("normalize_depth: fewer than two valid depths");
  std::sort(vals.begin(), vals.end());
  if (vals.front() == vals.back()) throw DataError("normalize_depth: constant depth map");

  NormalizationParams params;
  params.p2 = percentile_linear(vals, 2.0);
  params.p98 = percentile_linear(vals, 98.0);
  if (!(params.p98 > params.p2))
    throw DataError("normalize_depth: degenerate percentile range");
  params.scale = 2.0 / (params.p98 - params.p2);
  params.shift = -1.0 - params.scale * params.p2;

  NormalizedDepth out;
  out.params = params;
  out.values = params.normalize_grid(d.values.cast<double>(), /*clamp=*/true);
  return out;
}

GuideRegionMode guide_region_mode_from_string(const std::string& s) {
  if (s == "bbox_minus_u") return GuideRegionMode::kBBoxMinusUnseen;
  if (s == "dilate_minus_u") return GuideRegionMode::kDilateMinusUnseen;
  throw ConfigError("agdd: unknown guide_region_mode '" + s + "'");
}

OraclePrior OraclePrior::from_raw_target(const DepthMap& target_raw,
                                         const NormalizationParams& params, double gamma,
                                         double beta, const GridD* bias_normalized,
                                         int track_below_t) {
  GridD distorted = gamma * target_raw.values.cast<double>() + beta;
  GridD target = params.normalize_grid(distorted, /*clamp=*/false);
  if (bias_normalized) {
    if (bias_normalized->rows() != target.rows() || bias_normalized->cols() != target.cols())
      throw DimensionError("oracle prior: bias field shape mismatch");
    target += *bias_normalized;
  }
  return OraclePrior(std::move(target), track_below_t);
}

GridD OraclePrior::predict_noise(const GridD& d_t, int t, const DiffusionSchedule& sched) const {
  if (d_t.rows() != target_.rows() || d_t.cols() != target_.cols())
    throw DimensionError("oracle prior: state shape mismatch");
  if (t <= track_below_t_) return GridD::Zero(d_t.rows(), d_t.cols());
  const double ab = sched.alpha_bar(t);
  if (!(ab < 1.0)) throw DataError("oracle prior: alpha_bar(t) must be < 1 at noisy steps");
  return (d_t - std::sqrt(ab) * target_) / std::sqrt(1.0 - ab);
}

BinaryMask guide_mask(const BinaryMask& u, const BBox& b) {
  b.validate(u.width(), u.height());
  BinaryMask out = BinaryMask::zeros(u.height(), u.width());
  for (int v = b.y_min; v <= b.y_max; ++v)
    for (int x = b.x_min; x <= b.x_max; ++x)
      if (u.values(v, x) == 0) out.values(v, x) = 1;
  return out;
}

namespace {

LossResult data_term(const GridD& d_est, const GridD& d_inc, const BinaryMask& m_guide, double delta,
                     GuidanceLoss kind) {
  if (d_est.rows() != d_inc.rows() || d_est.cols() != d_inc.cols() ||
      d_est.rows() != m_guide.values.rows() || d_est.cols() != m_guide.values.cols())
    throw DimensionError("guidance loss: shape mismatch");
  LossResult out;
  out.gradient = GridD::Zero(d_est.rows(), d_est.cols());
  double loss = 0.0;
  for (long i = 0; i < d_est.size(); ++i) {
    if (m_guide.values.data()[i] == 0) continue;
    const double r = d_est.data()[i] - d_inc.data()[i];
    if (kind == GuidanceLoss::kL2) {
      loss += 0.5 * r * r;
      out.gradient.data()[i] = r;
    } else if (std::abs(r) < delta) {
      loss += 0.5 * r * r;
      out.gradient.data()[i] = r;
    } else {
      loss += delta * std::abs(r) - 0.5 * delta * delta;
      out.gradient.data()[i] = r > 0 ? delta : -delta;
    }
  }
  out.loss = loss;
  return out;
}

}  // namespace

LossResult adaptive_loss(const GridD& d_est, const GridD& d_inc, const BinaryMask& m_guide,
                         double delta) {
  if (!(delta > 0)) throw ConfigError("adaptive_loss: delta must be > 0");
  return data_term(d_est, d_inc, m_guide, delta, GuidanceLoss::kAdaptiveHuber);
}

LossResult l2_loss(const GridD& d_est, const GridD& d_inc, const BinaryMask& m_guide) {
  return data_term(d_est, d_inc, m_guide, 0.0, GuidanceLoss::kL2);
}

GridD predicted_clean(const GridD& d_t, const GridD& eps_hat, int t, const DiffusionSchedule& sched) {
  const double ab = sched.alpha_bar(t);
  if (!(ab > 0.0)) throw DataError("predicted_clean: alpha_bar(t) must be positive");
  return (d_t - std::sqrt(1.0 - ab) * eps_hat) / std::sqrt(ab);
}

GridD agdd_step(const GridD& d_t, int t, const DepthPrior& prior, const GridD& d_inc_normalized,
                const BinaryMask& m_guide, const AgddConfig& cfg, const DiffusionSchedule& sched,
                GuidanceLoss loss, double* pre_refinement_loss) {
  if (t < 1 || t > sched.steps) throw DataError("agdd_step: timestep out of schedule");
  const double ab_t = sched.alpha_bar(t);
  const double ab_prev = sched.alpha_bar(t - 1);
  const double noise_to_clean = -std::sqrt(1.0 - ab_t) / std::sqrt(ab_t);  // dD_pre / d_eps

  GridD eps = prior.predict_noise(d_t, t, sched);
  for (int k = 0; k < cfg.inner_iters; ++k) {
    const GridD d_pre = prior.decode(predicted_clean(d_t, eps, t, sched));
    const LossResult lr = data_term(d_pre, d_inc_normalized, m_guide, cfg.delta, loss);
    if (k == 0 && pre_refinement_loss) *pre_refinement_loss = lr.loss;
    if (cfg.alpha == 0.0) break;  // bitwise identical to the unguided step
    // d(loss)/d(eps) through the identity decoder
    eps -= cfg.alpha * (noise_to_clean * lr.gradient);
  }
  const GridD d0 = predicted_clean(d_t, eps, t, sched);
  return std::sqrt(ab_prev) * d0 + std::sqrt(1.0 - ab_prev) * eps;
}

namespace {

AlignmentResult guided_run(const DepthPrior& prior, const DepthMap& d_incomplete,
                           const BinaryMask& u, const AgddConfig& cfg,
                           const DiffusionSchedule& sched, std::uint64_t seed, GuidanceLoss loss) {
  cfg.validate();
  sched.validate();
  if (!same_shape(d_incomplete.values, u.values))
    throw DimensionError("agdd_run: depth and unseen mask shape mismatch");
  if (u.empty()) throw DataError("agdd_run: unseen mask is empty");

  const NormalizedDepth norm = normalize_depth(d_incomplete);

  // B around the unseen region; guide support restricted to valid depths.
  const BBox region = warpmask::bbox_prompt(u, cfg.bbox_margin);
  BinaryMask guide;
  if (cfg.guide_region_mode == GuideRegionMode::kBBoxMinusUnseen) {
    guide = guide_mask(u, region);
  } else {
    const BinaryMask grown = dilate(u, cfg.bbox_margin);
    GridU8 g = (grown.values == 1 && u.values == 0).cast<std::uint8_t>();
    guide = BinaryMask{std::move(g)};
  }
  const BinaryMask valid = valid_mask(d_incomplete);
  guide = BinaryMask{(guide.values == 1 && valid.values == 1).cast<std::uint8_t>().eval()};

  GridD state = gaussian_field(d_incomplete.height(), d_incomplete.width(), seed);
  AlignmentResult out;
  out.loss_trace.reserve(static_cast<std::size_t>(sched.steps));
  for (int t = sched.steps; t >= 1; --t) {
    double pre_loss = 0.0;
    state = agdd_step(state, t, prior, norm.values, guide, cfg, sched, loss, &pre_loss);
    out.loss_trace.push_back(pre_loss);
  }

  GridD raw = norm.params.unnormalize_grid(prior.decode(state));
  // Invalid depth is encoded as 0; keep the output usable everywhere in B.
  GridF depth = raw.cast<float>().max(1e-6f);
  out.aligned = DepthMap{std::move(depth)};
  out.region = region;
  out.guide = guide;
  out.params = norm.params;
  return out;
}

}  // namespace

AlignmentResult agdd_run(const DepthPrior& prior, const DepthMap& d_incomplete, const BinaryMask& u,
                         const AgddConfig& cfg, const DiffusionSchedule& sched, std::uint64_t seed) {
  return guided_run(prior, d_incomplete, u, cfg, sched, seed, GuidanceLoss::kAdaptiveHuber);
}

AlignmentResult l2_guided_run(const DepthPrior& prior, const DepthMap& d_incomplete,
                              const BinaryMask& u, const AgddConfig& cfg,
                              const DiffusionSchedule& sched, std::uint64_t seed) {
  return guided_run(prior, d_incomplete, u, cfg, sched, seed, GuidanceLoss::kL2);
}

ScaleShiftResult scale_shift_align(const DepthMap& d_est, const DepthMap& d_inc,
                                   const BinaryMask& mask) {
  if (!same_shape(d_est.values, d_inc.values) || !same_shape(d_est.values, mask.values))
    throw DimensionError("scale_shift_align: shape mismatch");
  // Normal equations for [gamma beta]: [[Sxx Sx],[Sx n]] [g b]' = [Sxy Sy]'
  double sxx = 0, sx = 0, sxy = 0, sy = 0, n = 0;
  for (long i = 0; i < d_est.values.size(); ++i) {
    if (mask.values.data()[i] == 0) continue;
    const double x = d_est.values.data()[i];
    const double y = d_inc.values.data()[i];
    sxx += x * x;
    sx += x;
    sxy += x * y;
    sy += y;
    n += 1;
  }
  if (n < 2) throw DataError("scale_shift_align: need at least two masked pixels");
  const double det = sxx * n - sx * sx;
  const double scale2 = std::max(sxx, 1.0);
  if (std::abs(det) <= 1e-12 * scale2 * n)
    throw DataError("scale_shift_align: singular normal equations (constant estimate on mask)");
  ScaleShiftResult out;
  out.gamma = (sxy * n - sx * sy) / det;
  out.beta = (sxx * sy - sx * sxy) / det;
  GridF aligned = (out.gamma * d_est.values.cast<double>() + out.beta).cast<float>().max(0.0f);
  out.aligned = DepthMap{std::move(aligned)};
  return out;
}

}  // namespace scenefill::agdd
