#pragma once

#include <vector>

#include "scenefill/error.hpp"

namespace scenefill {

/// Variance schedule for a T-step diffusion process. betas[t-1] is the noise
/// rate of the transition into step t; alpha_bars[t] is the cumulative product
/// of (1 - beta) up to t, with alpha_bars[0] = 1 at the clean end.
struct DiffusionSchedule {
  int steps = 0;
  std::vector<double> betas;       // size steps
  std::vector<double> alpha_bars;  // size steps + 1, strictly decreasing

  double alpha_bar(int t) const {
    if (t < 0 || t > steps) throw DataError("schedule: timestep out of range");
    return alpha_bars[static_cast<std::size_t>(t)];
  }
  void validate() const;
};

DiffusionSchedule make_linear_schedule(int steps, double beta_min, double beta_max);

}  // namespace scenefill
