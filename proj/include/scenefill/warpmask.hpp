#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scenefill/camera.hpp"
#include "scenefill/image.hpp"

namespace scenefill::warpmask {

/// Removal region from depth differencing: 1 where |d_full - d_incomplete|
/// exceeds eps_d. Pixels invalid in d_incomplete but valid in d_full count as
/// removed regardless of the magnitude of the difference.
BinaryMask removal_region(const DepthMap& d_full, const DepthMap& d_incomplete, double eps_d);

/// Default depth-difference tolerance: 1% of the valid-depth median of d_full.
double default_eps_d(const DepthMap& d_full);

struct TraverseResult {
  VoteGrid votes;     // 1 where the warped landing falls inside the removal region
  BinaryMask valid;   // 1 where a correspondence could be established at all
};

/// Backward traversal: unprojects each valid-depth pixel of view n through
/// d_n_incomplete, maps it by t_n_to_i, projects into view i and gathers r_i
/// bilinearly (> 0.5 counts as in-removal). Pixels with invalid depth or
/// out-of-frustum landings vote 0 and are flagged invalid.
TraverseResult traverse_removal(const BinaryMask& r_i, const DepthMap& d_n_incomplete,
                                const Pose& t_n_to_i, const CameraIntrinsics& k_n,
                                const CameraIntrinsics& k_i);

enum class VoteAverage {
  kFixedK,     // denominator is the number of views; missing correspondences count as 0
  kValidOnly,  // denominator is the per-pixel count of valid correspondences
};

VoteGrid vote_mean(const std::vector<TraverseResult>& warps, VoteAverage mode);

/// Unseen-mask contour: pixel set iff mean vote >= theta and r_n = 1.
BinaryMask aggregate_contour(const std::vector<VoteGrid>& votes, const BinaryMask& r_n, double theta);
BinaryMask aggregate_contour(const VoteGrid& votes_mean, const BinaryMask& r_n, double theta);

/// Tight bbox of the set pixels, expanded by padding, clamped to the image.
BBox bbox_prompt(const BinaryMask& c_n, int padding);

void write_bbox_json(const std::filesystem::path& path, const std::string& view_id, const BBox& box);
std::filesystem::path bbox_json_name(const std::string& view_id);

/// Deterministic stand-in for an external segmenter: within the bbox, takes
/// pixels with votes_mean >= theta or r_n = 1, closes with the given radius,
/// and keeps the largest 4-connected component.
BinaryMask refine_unseen_fallback(const VoteGrid& votes_mean, const BinaryMask& r_n, const BBox& bbox,
                                  double theta, int close_radius);

struct IngestedMask {
  BinaryMask mask;
  bool binarized_intermediate = false;  // gray values other than 0/255 were thresholded at 128
};

IngestedMask ingest_external_mask(const std::filesystem::path& path, int expected_width,
                                  int expected_height);

}  // namespace scenefill::warpmask
