#pragma once

#include "scenefill/image.hpp"

namespace scenefill {

/// Square (Chebyshev) structuring element of the given radius.
BinaryMask dilate(const BinaryMask& m, int radius);
BinaryMask erode(const BinaryMask& m, int radius);
BinaryMask morphological_close(const BinaryMask& m, int radius);

/// Keeps the largest 4-connected component; ties resolved by first
/// row-major pixel. Empty input stays empty.
BinaryMask largest_component_4(const BinaryMask& m);

}  // namespace scenefill
