#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scenefill/agdd.hpp"
#include "scenefill/io.hpp"
#include "scenefill/warpmask.hpp"

namespace scenefill::pipeline {

struct OraclePriorConfig {
  double gamma = 1.0;
  double beta = 0.0;
  int track_below_t = 0;  // 0 = pure steering oracle
};

struct PipelineConfig {
  std::filesystem::path dataset;
  std::filesystem::path out;
  std::string reference_view;

  double theta = 0.6;
  std::optional<double> eps_d;  // default: 1% of the valid-depth median of d_full
  int bbox_padding = 0;
  int close_radius = 2;
  warpmask::VoteAverage vote_average = warpmask::VoteAverage::kFixedK;
  std::optional<std::filesystem::path> external_mask_dir;

  agdd::AgddConfig agdd;
  std::string prior_type = "oracle";
  OraclePriorConfig oracle;

  double sdedit_strength = 0.85;
  int sdedit_total_steps = 50;

  std::uint64_t seed = 0;
  int workers = 0;  // 0 = hardware concurrency

  void validate() const;
};

PipelineConfig config_from_json_text(const std::string& text);
PipelineConfig config_read(const std::filesystem::path& path);

struct Dataset {
  std::vector<io::ViewEntry> views;
  std::filesystem::path root;

  const io::ViewEntry& view(const std::string& id) const;
  DepthMap depth_full(const std::string& id) const;
  DepthMap depth_incomplete(const std::string& id) const;
  std::optional<DepthMap> depth_background(const std::string& id) const;
  std::optional<BinaryMask> gt_unseen(const std::string& id) const;
  RgbImage rgb(const std::string& id) const;
};

Dataset open_dataset(const std::filesystem::path& root);

/// Stage outputs land under cfg.out:
///   unseen/<id>.pgm, unseen_bbox_<id>.json, votes/<id>.pfm,
///   aligned_depth_<ref>.pfm, align_trace_<ref>.csv,
///   points_<ref>.ply, report.json
void run_unseen(const PipelineConfig& cfg);
void run_align(const PipelineConfig& cfg);
void run_unproject(const PipelineConfig& cfg);
void run_eval(const PipelineConfig& cfg);

/// unseen -> align -> unproject -> eval with content-hash stage caching.
/// Returns the list of stages that actually ran (the rest were cached).
std::vector<std::string> run_pipeline(const PipelineConfig& cfg, bool force);

}  // namespace scenefill::pipeline
