#include "scenefill/ddim.hpp"

#include <cmath>

#include "scenefill/error.hpp"

namespace scenefill::ddim {

int compute_t_inv(int total_steps, double strength) {
  if (total_steps < 1) throw ConfigError("compute_t_inv: total_steps must be >= 1");
  if (!(strength >= 0.0 && strength <= 1.0))
    throw ConfigError("compute_t_inv: strength must lie in [0, 1]");
  // Nudge against representation error in T * (1 - s) before flooring.
  return static_cast<int>(std::floor(double(total_steps) * (1.0 - strength) + 1e-9));
}

GridD ddim_invert(const GridD& x0, int t_inv, const ScoreModel& model,
                  const DiffusionSchedule& sched, const GridD* conditioning) {
  sched.validate();
  if (t_inv < 0 || t_inv > sched.steps) throw DataError("ddim_invert: t_inv out of schedule");
  GridD x = x0;
  for (int t = 0; t < t_inv; ++t) {
    const GridD eps = model.predict_noise(x, t, conditioning, sched);
    const double ab = sched.alpha_bar(t);
    const double ab_next = sched.alpha_bar(t + 1);
    const GridD clean = (x - std::sqrt(1.0 - ab) * eps) / std::sqrt(ab);
    x = std::sqrt(ab_next) * clean + std::sqrt(1.0 - ab_next) * eps;
  }
  return x;
}

GridD ddim_denoise(const GridD& x_t, int t_start, const ScoreModel& model,
                   const DiffusionSchedule& sched, const GridD* conditioning) {
  sched.validate();
  if (t_start < 0 || t_start > sched.steps) throw DataError("ddim_denoise: t_start out of schedule");
  GridD x = x_t;
  for (int t = t_start; t > 0; --t) {
    const GridD eps = model.predict_noise(x, t, conditioning, sched);
    const double ab = sched.alpha_bar(t);
    const double ab_prev = sched.alpha_bar(t - 1);
    const GridD clean = (x - std::sqrt(1.0 - ab) * eps) / std::sqrt(ab);
    x = std::sqrt(ab_prev) * clean + std::sqrt(1.0 - ab_prev) * eps;
  }
  return x;
}

}  // namespace scenefill::ddim
