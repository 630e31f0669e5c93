#pragma once

#include <optional>

#include "scenefill/grid.hpp"
#include "scenefill/schedule.hpp"

namespace scenefill::ddim {

/// Deterministic noise predictor for the DDIM machinery. The conditioning
/// grid, when present, is whatever the concrete model wants (a reference
/// image, usually).
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;
  virtual GridD predict_noise(const GridD& x, int t, const GridD* conditioning,
                              const DiffusionSchedule& sched) const = 0;
};

/// eps(x, t) = (c0 + c1 * t / T) * x — smooth in t/T so discretization error
/// shrinks as the schedule is refined.
class LinearScoreModel : public ScoreModel {
 public:
  LinearScoreModel(double c0, double c1) : c0_(c0), c1_(c1) {}
  GridD predict_noise(const GridD& x, int t, const GridD*,
                      const DiffusionSchedule& sched) const override {
    return (c0_ + c1_ * double(t) / double(sched.steps)) * x;
  }

 private:
  double c0_, c1_;
};

/// t_inv = floor(T * (1 - s)); s = 1 keeps the image, s = 0 is full noise.
int compute_t_inv(int total_steps, double strength);

/// Deterministic reverse-DDIM recursion from t = 0 up to t_inv. Returns the
/// noisy state, not the clean image. The noise at the destination step is
/// approximated by the prediction at the current state.
GridD ddim_invert(const GridD& x0, int t_inv, const ScoreModel& model,
                  const DiffusionSchedule& sched, const GridD* conditioning = nullptr);

/// Deterministic DDIM denoising from t_start down to 0.
GridD ddim_denoise(const GridD& x_t, int t_start, const ScoreModel& model,
                   const DiffusionSchedule& sched, const GridD* conditioning = nullptr);

}  // namespace scenefill::ddim
