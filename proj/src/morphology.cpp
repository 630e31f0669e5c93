#include "scenefill/morphology.hpp"

#include <vector>

namespace scenefill {

namespace {

// Separable sliding extremum over a (2r+1) window, rows then columns.
GridU8 window_pass(const GridU8& in, int radius, bool take_max) {
  const int h = static_cast<int>(in.rows()), w = static_cast<int>(in.cols());
  GridU8 tmp(h, w), out(h, w);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const int lo = std::max(0, u - radius), hi = std::min(w - 1, u + radius);
      std::uint8_t acc = in(v, lo);
      for (int x = lo + 1; x <= hi; ++x)
        acc = take_max ? std::max(acc, in(v, x)) : std::min(acc, in(v, x));
      tmp(v, u) = acc;
    }
  }
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const int lo = std::max(0, v - radius), hi = std::min(h - 1, v + radius);
      std::uint8_t acc = tmp(lo, u);
      for (int y = lo + 1; y <= hi; ++y)
        acc = take_max ? std::max(acc, tmp(y, u)) : std::min(acc, tmp(y, u));
      out(v, u) = acc;
    }
  }
  return out;
}

}  // namespace

BinaryMask dilate(const BinaryMask& m, int radius) {
  if (radius <= 0) return m;
  return BinaryMask{window_pass(m.values, radius, true)};
}

BinaryMask erode(const BinaryMask& m, int radius) {
  if (radius <= 0) return m;
  return BinaryMask{window_pass(m.values, radius, false)};
}

BinaryMask morphological_close(const BinaryMask& m, int radius) {
  if (radius <= 0) return m;
  return erode(dilate(m, radius), radius);
}

BinaryMask largest_component_4(const BinaryMask& m) {
  const int h = m.height(), w = m.width();
  std::vector<int> label(static_cast<std::size_t>(h) * w, -1);
  int best_label = -1;
  std::int64_t best_size = 0;
  int next = 0;
  std::vector<int> stack;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const int idx = v * w + u;
      if (m.values(v, u) == 0 || label[idx] >= 0) continue;
      std::int64_t size = 0;
      stack.push_back(idx);
      label[idx] = next;
      while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        ++size;
        const int cv = cur / w, cu = cur % w;
        const int nbs[4][2] = {{cv - 1, cu}, {cv + 1, cu}, {cv, cu - 1}, {cv, cu + 1}};
        for (const auto& nb : nbs) {
          if (nb[0] < 0 || nb[0] >= h || nb[1] < 0 || nb[1] >= w) continue;
          const int nidx = nb[0] * w + nb[1];
          if (m.values(nb[0], nb[1]) == 1 && label[nidx] < 0) {
            label[nidx] = next;
            stack.push_back(nidx);
          }
        }
      }
      if (size > best_size) {
        best_size = size;
        best_label = next;
      }
      ++next;
    }
  }
  BinaryMask out = BinaryMask::zeros(h, w);
  if (best_label < 0) return out;
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      if (label[v * w + u] == best_label) out.values(v, u) = 1;
  return out;
}

}  // namespace scenefill
