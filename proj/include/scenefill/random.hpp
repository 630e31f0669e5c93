#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "scenefill/grid.hpp"

namespace scenefill {

/// Deterministic standard-normal field. Box-Muller over mt19937_64 keeps the
/// byte stream identical across platforms and standard libraries.
inline GridD gaussian_field(int height, int width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double two_pi = 6.283185307179586476925286766559;
  GridD out(height, width);
  double spare = 0.0;
  bool has_spare = false;
  auto uniform = [&rng]() {
    // (0, 1]: avoids log(0)
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  };
  for (long i = 0; i < out.size(); ++i) {
    if (has_spare) {
      out.data()[i] = spare;
      has_spare = false;
    } else {
      const double u1 = uniform();
      const double u2 = uniform();
      const double mag = std::sqrt(-2.0 * std::log(u1));
      out.data()[i] = mag * std::cos(two_pi * u2);
      spare = mag * std::sin(two_pi * u2);
      has_spare = true;
    }
  }
  return out;
}

}  // namespace scenefill
