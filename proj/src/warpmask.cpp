#include "scenefill/warpmask.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "scenefill/io.hpp"
#include "scenefill/morphology.hpp"

namespace scenefill::warpmask {

BinaryMask removal_region(const DepthMap& d_full, const DepthMap& d_incomplete, double eps_d) {
  if (!same_shape(d_full.values, d_incomplete.values))
    throw DimensionError("removal_region: depth grids differ in shape");
  if (!(eps_d > 0)) throw ConfigError("removal_region: eps_d must be positive");
  const int h = d_full.height(), w = d_full.width();
  BinaryMask out = BinaryMask::zeros(h, w);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const float full = d_full.values(v, u), inc = d_incomplete.values(v, u);
      if (inc <= 0.0f && full > 0.0f) {
        out.values(v, u) = 1;
      } else {
        out.values(v, u) = std::abs(double(full) - double(inc)) > eps_d ? 1 : 0;
      }
    }
  }
  return out;
}

double default_eps_d(const DepthMap& d_full) {
  std::vector<float> vals;
  vals.reserve(static_cast<std::size_t>(d_full.values.size()));
  for (long i = 0; i < d_full.values.size(); ++i)
    if (d_full.values.data()[i] > 0.0f) vals.push_back(d_full.values.data()[i]);
  if (vals.empty()) throw DataError("default_eps_d: no valid depths");
  const std::size_t mid = vals.size() / 2;
  std::nth_element(vals.begin(), vals.begin() + mid, vals.end());
  return 0.01 * double(vals[mid]);
}

namespace {

// Bilinear gather of a {0,1} mask; integer grid positions are pixel centers.
double sample_mask_bilinear(const GridU8& m, double x, double y) {
  const int w = static_cast<int>(m.cols()), h = static_cast<int>(m.rows());
  const int x0 = std::clamp(static_cast<int>(std::floor(x)), 0, w - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor(y)), 0, h - 1);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = std::clamp(x - x0, 0.0, 1.0);
  const double fy = std::clamp(y - y0, 0.0, 1.0);
  const double top = (1 - fx) * m(y0, x0) + fx * m(y0, x1);
  const double bot = (1 - fx) * m(y1, x0) + fx * m(y1, x1);
  return (1 - fy) * top + fy * bot;
}

}  // namespace

TraverseResult traverse_removal(const BinaryMask& r_i, const DepthMap& d_n_incomplete,
                                const Pose& t_n_to_i, const CameraIntrinsics& k_n,
                                const CameraIntrinsics& k_i) {
  if (r_i.height() != k_i.height || r_i.width() != k_i.width)
    throw DimensionError("traverse_removal: r_i does not match k_i dimensions");
  if (d_n_incomplete.height() != k_n.height || d_n_incomplete.width() != k_n.width)
    throw DimensionError("traverse_removal: depth does not match k_n dimensions");

  const int h = k_n.height, w = k_n.width;
  TraverseResult out{VoteGrid::zeros(h, w), BinaryMask::zeros(h, w)};
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const float z = d_n_incomplete.values(v, u);
      if (z <= 0.0f) continue;
      const Eigen::Vector3d p_n = unproject_pixel<double>(u, v, z, k_n);
      const Eigen::Vector3d p_i = t_n_to_i.apply(p_n);
      const Projection<double> proj = project_point<double>(p_i, k_i);
      if (!proj.in_frustum) continue;
      out.valid.values(v, u) = 1;
      if (sample_mask_bilinear(r_i.values, proj.u, proj.v) > 0.5) out.votes.values(v, u) = 1.0f;
    }
  }
  return out;
}

VoteGrid vote_mean(const std::vector<TraverseResult>& warps, VoteAverage mode) {
  if (warps.empty()) throw DataError("vote_mean: empty warp list");
  const int h = warps.front().votes.height(), w = warps.front().votes.width();
  GridF sum = GridF::Zero(h, w);
  GridF counts = GridF::Zero(h, w);
  for (const TraverseResult& t : warps) {
    if (t.votes.height() != h || t.votes.width() != w)
      throw DimensionError("vote_mean: vote grids differ in shape");
    sum += t.votes.values;
    counts += t.valid.values.cast<float>();
  }
  if (mode == VoteAverage::kFixedK) {
    return VoteGrid{(sum / float(warps.size())).eval()};
  }
  GridF mean = GridF::Zero(h, w);
  for (long i = 0; i < mean.size(); ++i)
    if (counts.data()[i] > 0.0f) mean.data()[i] = sum.data()[i] / counts.data()[i];
  return VoteGrid{std::move(mean)};
}

BinaryMask aggregate_contour(const VoteGrid& votes_mean, const BinaryMask& r_n, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("aggregate_contour: theta must be in (0, 1]");
  if (!same_shape(votes_mean.values, r_n.values))
    throw DimensionError("aggregate_contour: shape mismatch");
  GridU8 out(r_n.values.rows(), r_n.values.cols());
  for (long i = 0; i < out.size(); ++i)
    out.data()[i] = (votes_mean.values.data()[i] >= float(theta) && r_n.values.data()[i] == 1) ? 1 : 0;
  return BinaryMask{std::move(out)};
}

BinaryMask aggregate_contour(const std::vector<VoteGrid>& votes, const BinaryMask& r_n, double theta) {
  if (votes.empty()) throw DataError("aggregate_contour: empty vote list");
  const int h = r_n.height(), w = r_n.width();
  GridF sum = GridF::Zero(h, w);
  for (const VoteGrid& g : votes) {
    if (g.height() != h || g.width() != w) throw DimensionError("aggregate_contour: shape mismatch");
    sum += g.values;
  }
  return aggregate_contour(VoteGrid{(sum / float(votes.size())).eval()}, r_n, theta);
}

BBox bbox_prompt(const BinaryMask& c_n, int padding) {
  if (padding < 0) throw ConfigError("bbox_prompt: negative padding");
  const int h = c_n.height(), w = c_n.width();
  int x0 = w, y0 = h, x1 = -1, y1 = -1;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (c_n.values(v, u) == 0) continue;
      x0 = std::min(x0, u);
      y0 = std::min(y0, v);
      x1 = std::max(x1, u);
      y1 = std::max(y1, v);
    }
  }
  if (x1 < 0) throw DataError("bbox_prompt: empty contour");
  BBox box{std::max(0, x0 - padding), std::max(0, y0 - padding), std::min(w - 1, x1 + padding),
           std::min(h - 1, y1 + padding)};
  box.validate(w, h);
  return box;
}

std::filesystem::path bbox_json_name(const std::string& view_id) {
  return "unseen_bbox_" + view_id + ".json";
}

void write_bbox_json(const std::filesystem::path& path, const std::string& view_id, const BBox& box) {
  nlohmann::json doc;
  doc["view_id"] = view_id;
  doc["bbox"] = {box.x_min, box.y_min, box.x_max, box.y_max};
  io::write_file(path, doc.dump(2) + "\n");
}

BinaryMask refine_unseen_fallback(const VoteGrid& votes_mean, const BinaryMask& r_n, const BBox& bbox,
                                  double theta, int close_radius) {
  if (!same_shape(votes_mean.values, r_n.values))
    throw DimensionError("refine_unseen_fallback: shape mismatch");
  bbox.validate(r_n.width(), r_n.height());
  const int bw = bbox.width(), bh = bbox.height();
  BinaryMask window = BinaryMask::zeros(bh, bw);
  for (int v = 0; v < bh; ++v)
    for (int u = 0; u < bw; ++u) {
      const int gv = bbox.y_min + v, gu = bbox.x_min + u;
      if (votes_mean.values(gv, gu) >= float(theta) || r_n.values(gv, gu) == 1)
        window.values(v, u) = 1;
    }
  window = morphological_close(window, close_radius);
  window = largest_component_4(window);
  BinaryMask out = BinaryMask::zeros(r_n.height(), r_n.width());
  for (int v = 0; v < bh; ++v)
    for (int u = 0; u < bw; ++u)
      if (window.values(v, u) == 1) out.values(bbox.y_min + v, bbox.x_min + u) = 1;
  return out;
}

IngestedMask ingest_external_mask(const std::filesystem::path& path, int expected_width,
                                  int expected_height) {
  const GridU8 gray = io::pgm_read(path);
  if (gray.cols() != expected_width || gray.rows() != expected_height)
    throw DimensionError("ingest_external_mask: " + path.string() + " is " +
                         std::to_string(gray.cols()) + "x" + std::to_string(gray.rows()) +
                         ", expected " + std::to_string(expected_width) + "x" +
                         std::to_string(expected_height));
  IngestedMask out;
  out.mask = io::mask_from_gray(gray, &out.binarized_intermediate);
  return out;
}

}  // namespace scenefill::warpmask
