#include "scenefill/schedule.hpp"

#include <cmath>

namespace scenefill {

void DiffusionSchedule::validate() const {
  if (steps < 1) throw ConfigError("schedule: steps must be >= 1");
  if (betas.size() != static_cast<std::size_t>(steps) ||
      alpha_bars.size() != static_cast<std::size_t>(steps) + 1)
    throw ConfigError("schedule: array sizes inconsistent with steps");
  if (std::abs(alpha_bars[0] - 1.0) > 1e-6) throw ConfigError("schedule: alpha_bar(0) must be 1");
  for (int t = 0; t < steps; ++t) {
    if (!(betas[t] > 0.0 && betas[t] < 1.0)) throw ConfigError("schedule: betas must lie in (0, 1)");
    if (!(alpha_bars[t + 1] < alpha_bars[t]))
      throw ConfigError("schedule: alpha_bars must be strictly decreasing");
    if (!(alpha_bars[t + 1] > 0.0)) throw ConfigError("schedule: alpha_bars must stay positive");
  }
}

DiffusionSchedule make_linear_schedule(int steps, double beta_min, double beta_max) {
  if (steps < 1) throw ConfigError("schedule: steps must be >= 1");
  DiffusionSchedule s;
  s.steps = steps;
  s.betas.resize(static_cast<std::size_t>(steps));
  s.alpha_bars.resize(static_cast<std::size_t>(steps) + 1);
  s.alpha_bars[0] = 1.0;
  for (int t = 0; t < steps; ++t) {
    const double f = steps == 1 ? 0.0 : double(t) / double(steps - 1);
    s.betas[t] = beta_min + f * (beta_max - beta_min);
    s.alpha_bars[t + 1] = s.alpha_bars[t] * (1.0 - s.betas[t]);
  }
  s.validate();
  return s;
}

}  // namespace scenefill
