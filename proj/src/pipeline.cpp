#include "scenefill/pipeline.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>

#include "scenefill/metrics.hpp"
#include "scenefill/parallel.hpp"
#include "scenefill/unproject.hpp"

namespace scenefill::pipeline {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

}  // namespace

void PipelineConfig::validate() const {
  if (dataset.empty()) throw ConfigError("config: dataset directory is required");
  if (out.empty()) throw ConfigError("config: output directory is required");
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("config: theta must lie in (0, 1]");
  if (eps_d && !(*eps_d > 0.0)) throw ConfigError("config: eps_d must be positive");
  if (bbox_padding < 0) throw ConfigError("config: bbox padding must be >= 0");
  if (close_radius < 0) throw ConfigError("config: close_radius must be >= 0");
  if (!(sdedit_strength >= 0.0 && sdedit_strength <= 1.0))
    throw ConfigError("config: sdedit.strength must lie in [0, 1]");
  if (sdedit_total_steps < 1) throw ConfigError("config: sdedit.total_steps must be >= 1");
  if (prior_type != "oracle") throw ConfigError("config: unknown prior type '" + prior_type + "'");
  agdd.validate();
}

PipelineConfig config_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: bad JSON: ") + e.what());
  }
  PipelineConfig cfg;
  try {
    cfg.dataset = doc.at("dataset").get<std::string>();
    cfg.out = doc.value("out", std::string("out"));
    cfg.reference_view = doc.value("reference_view", std::string());
    cfg.theta = doc.value("theta", 0.6);
    if (doc.contains("eps_d")) cfg.eps_d = doc["eps_d"].get<double>();
    cfg.bbox_padding = doc.value("bbox_padding", 0);
    cfg.close_radius = doc.value("close_radius", 2);
    const std::string avg = doc.value("vote_average", std::string("fixed_k"));
    if (avg == "fixed_k") {
      cfg.vote_average = warpmask::VoteAverage::kFixedK;
    } else if (avg == "valid_only") {
      cfg.vote_average = warpmask::VoteAverage::kValidOnly;
    } else {
      throw ConfigError("config: vote_average must be 'fixed_k' or 'valid_only'");
    }
    if (doc.contains("external_mask_dir"))
      cfg.external_mask_dir = doc["external_mask_dir"].get<std::string>();
    if (doc.contains("agdd")) {
      const auto& a = doc["agdd"];
      cfg.agdd.alpha = a.value("alpha", cfg.agdd.alpha);
      cfg.agdd.inner_iters = a.value("inner_iters", cfg.agdd.inner_iters);
      cfg.agdd.delta = a.value("delta", cfg.agdd.delta);
      cfg.agdd.bbox_margin = a.value("bbox_margin", cfg.agdd.bbox_margin);
      cfg.agdd.steps = a.value("steps", cfg.agdd.steps);
      cfg.agdd.beta_min = a.value("beta_min", cfg.agdd.beta_min);
      cfg.agdd.beta_max = a.value("beta_max", cfg.agdd.beta_max);
      cfg.agdd.seed = a.value("seed", cfg.agdd.seed);
      if (a.contains("guide_region_mode"))
        cfg.agdd.guide_region_mode =
            agdd::guide_region_mode_from_string(a["guide_region_mode"].get<std::string>());
      if (a.contains("prior")) {
        const auto& p = a["prior"];
        cfg.prior_type = p.value("type", cfg.prior_type);
        cfg.oracle.gamma = p.value("gamma", cfg.oracle.gamma);
        cfg.oracle.beta = p.value("beta", cfg.oracle.beta);
        cfg.oracle.track_below_t = p.value("track_below_t", cfg.oracle.track_below_t);
      }
    }
    if (doc.contains("sdedit")) {
      cfg.sdedit_strength = doc["sdedit"].value("strength", cfg.sdedit_strength);
      cfg.sdedit_total_steps = doc["sdedit"].value("total_steps", cfg.sdedit_total_steps);
    }
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.workers = doc.value("workers", cfg.workers);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

PipelineConfig config_read(const std::filesystem::path& path) {
  return config_from_json_text(io::read_file(path));
}

const io::ViewEntry& Dataset::view(const std::string& id) const {
  for (const io::ViewEntry& v : views)
    if (v.id == id) return v;
  throw ConfigError("dataset: no view with id '" + id + "'");
}

namespace {

DepthMap load_depth_checked(const fs::path& path, const io::ViewEntry& v) {
  GridF g = io::pfm_read(path);
  if (g.cols() != v.intrinsics.width || g.rows() != v.intrinsics.height)
    throw DimensionError("dataset: " + path.string() + " does not match cameras.json dimensions");
  return DepthMap{std::move(g)};
}

}  // namespace

DepthMap Dataset::depth_full(const std::string& id) const {
  return load_depth_checked(root / "depth" / (id + ".pfm"), view(id));
}

DepthMap Dataset::depth_incomplete(const std::string& id) const {
  return load_depth_checked(root / "depth_incomplete" / (id + ".pfm"), view(id));
}

std::optional<DepthMap> Dataset::depth_background(const std::string& id) const {
  const fs::path p = root / "depth_background" / (id + ".pfm");
  if (!fs::exists(p)) return std::nullopt;
  return load_depth_checked(p, view(id));
}

std::optional<BinaryMask> Dataset::gt_unseen(const std::string& id) const {
  const fs::path p = root / "gt_unseen" / (id + ".pgm");
  if (!fs::exists(p)) return std::nullopt;
  const io::ViewEntry& v = view(id);
  BinaryMask m = io::mask_read_pgm(p);
  if (m.width() != v.intrinsics.width || m.height() != v.intrinsics.height)
    throw DimensionError("dataset: " + p.string() + " does not match cameras.json dimensions");
  return m;
}

RgbImage Dataset::rgb(const std::string& id) const {
  const io::ViewEntry& v = view(id);
  RgbImage img = io::ppm_read(root / "rgb" / (id + ".ppm"));
  if (img.width() != v.intrinsics.width || img.height() != v.intrinsics.height)
    throw DimensionError("dataset: rgb/" + id + ".ppm does not match cameras.json dimensions");
  return img;
}

Dataset open_dataset(const std::filesystem::path& root) {
  Dataset ds;
  ds.root = root;
  ds.views = io::cameras_read(root / "cameras.json");
  if (ds.views.empty()) throw DataError("dataset: cameras.json has no views");
  return ds;
}

namespace {

std::string reference_or_first(const PipelineConfig& cfg, const Dataset& ds) {
  if (cfg.reference_view.empty()) return ds.views.front().id;
  ds.view(cfg.reference_view);  // existence check
  return cfg.reference_view;
}

struct UnseenOutputs {
  BinaryMask unseen;
  std::optional<BBox> bbox;
  VoteGrid votes_mean;
  BinaryMask removal;
};

UnseenOutputs unseen_for_view(const PipelineConfig& cfg, const Dataset& ds, std::size_t n) {
  const io::ViewEntry& vn = ds.views[n];
  const DepthMap d_full = ds.depth_full(vn.id);
  const DepthMap d_inc = ds.depth_incomplete(vn.id);
  const double eps = cfg.eps_d ? *cfg.eps_d : warpmask::default_eps_d(d_full);
  const BinaryMask r_n = warpmask::removal_region(d_full, d_inc, eps);

  UnseenOutputs out;
  out.removal = r_n;

  // Single-view dataset: the removal footprint is all we know.
  if (ds.views.size() == 1) {
    out.unseen = r_n;
    out.votes_mean = VoteGrid::zeros(r_n.height(), r_n.width());
    if (!r_n.empty()) out.bbox = warpmask::bbox_prompt(r_n, cfg.bbox_padding);
    return out;
  }

  std::vector<warpmask::TraverseResult> warps;
  for (std::size_t i = 0; i < ds.views.size(); ++i) {
    if (i == n) continue;
    const io::ViewEntry& vi = ds.views[i];
    const DepthMap d_full_i = ds.depth_full(vi.id);
    const DepthMap d_inc_i = ds.depth_incomplete(vi.id);
    const BinaryMask r_i = warpmask::removal_region(d_full_i, d_inc_i, eps);
    const Pose t_n_to_i = relative_transform(vn.pose, vi.pose);
    warps.push_back(warpmask::traverse_removal(r_i, d_inc, t_n_to_i, vn.intrinsics, vi.intrinsics));
  }
  out.votes_mean = warpmask::vote_mean(warps, cfg.vote_average);
  const BinaryMask contour = warpmask::aggregate_contour(out.votes_mean, r_n, cfg.theta);
  if (contour.empty()) {
    out.unseen = BinaryMask::zeros(r_n.height(), r_n.width());
    return out;
  }
  out.bbox = warpmask::bbox_prompt(contour, cfg.bbox_padding);
  out.unseen =
      warpmask::refine_unseen_fallback(out.votes_mean, r_n, *out.bbox, cfg.theta, cfg.close_radius);
  return out;
}

}  // namespace

void run_unseen(const PipelineConfig& cfg) {
  cfg.validate();
  const Dataset ds = open_dataset(cfg.dataset);
  fs::create_directories(cfg.out / "unseen");
  fs::create_directories(cfg.out / "votes");

  const int n = static_cast<int>(ds.views.size());
  std::vector<UnseenOutputs> results(static_cast<std::size_t>(n));
  parallel_for(n, cfg.workers, [&](int i) {
    results[static_cast<std::size_t>(i)] = unseen_for_view(cfg, ds, static_cast<std::size_t>(i));
  });

  for (int i = 0; i < n; ++i) {
    const io::ViewEntry& v = ds.views[static_cast<std::size_t>(i)];
    UnseenOutputs& r = results[static_cast<std::size_t>(i)];
    if (cfg.external_mask_dir) {
      const fs::path ext = *cfg.external_mask_dir / (v.id + ".pgm");
      if (fs::exists(ext)) {
        const auto ingested =
            warpmask::ingest_external_mask(ext, v.intrinsics.width, v.intrinsics.height);
        if (ingested.binarized_intermediate)
          std::cerr << "warning: external mask " << ext.string()
                    << " had intermediate gray values; binarized at 128\n";
        r.unseen = ingested.mask;
      }
    }
    io::mask_write_pgm(cfg.out / "unseen" / (v.id + ".pgm"), r.unseen);
    io::pfm_write(cfg.out / "votes" / (v.id + ".pfm"), r.votes_mean.values);
    if (r.bbox) warpmask::write_bbox_json(cfg.out / warpmask::bbox_json_name(v.id), v.id, *r.bbox);
  }
}

namespace {

std::unique_ptr<agdd::DepthPrior> make_prior(const PipelineConfig& cfg, const Dataset& ds,
                                             const std::string& ref_id,
                                             const agdd::NormalizationParams& params) {
  if (cfg.prior_type != "oracle")
    throw ConfigError("align: unknown prior type '" + cfg.prior_type + "'");
  const auto target = ds.depth_background(ref_id);
  if (!target)
    throw DataError("align: oracle prior needs depth_background/" + ref_id +
                    ".pfm in the dataset");
  return std::make_unique<agdd::OraclePrior>(agdd::OraclePrior::from_raw_target(
      *target, params, cfg.oracle.gamma, cfg.oracle.beta, nullptr, cfg.oracle.track_below_t));
}

}  // namespace

void run_align(const PipelineConfig& cfg) {
  cfg.validate();
  const Dataset ds = open_dataset(cfg.dataset);
  const std::string ref = reference_or_first(cfg, ds);

  const fs::path unseen_path = cfg.out / "unseen" / (ref + ".pgm");
  if (!fs::exists(unseen_path))
    throw DataError("align: missing " + unseen_path.string() + " (run the unseen stage first)");
  const io::ViewEntry& v = ds.view(ref);
  BinaryMask u = io::mask_read_pgm(unseen_path);
  if (u.width() != v.intrinsics.width || u.height() != v.intrinsics.height)
    throw DimensionError("align: unseen mask does not match view dimensions");
  const DepthMap d_inc = ds.depth_incomplete(ref);

  const agdd::NormalizedDepth norm = agdd::normalize_depth(d_inc);
  const auto prior = make_prior(cfg, ds, ref, norm.params);
  const DiffusionSchedule sched =
      make_linear_schedule(cfg.agdd.steps, cfg.agdd.beta_min, cfg.agdd.beta_max);
  const std::uint64_t seed = cfg.agdd.seed != 0 ? cfg.agdd.seed : cfg.seed;
  const agdd::AlignmentResult result = agdd::agdd_run(*prior, d_inc, u, cfg.agdd, sched, seed);

  io::pfm_write(cfg.out / ("aligned_depth_" + ref + ".pfm"), result.aligned.values);
  std::ostringstream csv;
  csv << "outer_step,timestep,loss\n";
  for (std::size_t i = 0; i < result.loss_trace.size(); ++i)
    csv << i << "," << (sched.steps - static_cast<int>(i)) << "," << result.loss_trace[i] << "\n";
  io::write_file(cfg.out / ("align_trace_" + ref + ".csv"), csv.str());
}

void run_unproject(const PipelineConfig& cfg) {
  cfg.validate();
  const Dataset ds = open_dataset(cfg.dataset);
  const std::string ref = reference_or_first(cfg, ds);
  const io::ViewEntry& v = ds.view(ref);

  const fs::path unseen_path = cfg.out / "unseen" / (ref + ".pgm");
  const fs::path depth_path = cfg.out / ("aligned_depth_" + ref + ".pfm");
  if (!fs::exists(unseen_path)) throw DataError("unproject: missing " + unseen_path.string());
  if (!fs::exists(depth_path)) throw DataError("unproject: missing " + depth_path.string());

  BinaryMask u = io::mask_read_pgm(unseen_path);
  GridF depth = io::pfm_read(depth_path);
  const RgbImage rgb = ds.rgb(ref);
  const auto ps = unproject::init_points(rgb, DepthMap{std::move(depth)}, u, v.intrinsics, v.pose);
  unproject::export_ply(ps, cfg.out / ("points_" + ref + ".ply"));
  std::cerr << "unproject: " << ps.points.size() << " points\n";
}

void run_eval(const PipelineConfig& cfg) {
  cfg.validate();
  const Dataset ds = open_dataset(cfg.dataset);
  const std::string ref = reference_or_first(cfg, ds);
  metrics::MetricReport report;

  for (const io::ViewEntry& v : ds.views) {
    // Unseen-mask IoU against ground truth, when the dataset carries it.
    const fs::path unseen_path = cfg.out / "unseen" / (v.id + ".pgm");
    const auto gt = ds.gt_unseen(v.id);
    if (fs::exists(unseen_path) && gt) {
      const BinaryMask predicted = io::mask_read_pgm(unseen_path);
      report.add({v.id, "unseen_iou", "gt_unseen", metrics::mask_iou(predicted, *gt),
                  std::max<std::int64_t>(1, gt->count())});
    }

    // Masked PSNR against predictions, when a predictions directory exists.
    const fs::path pred_path = cfg.out / "predictions" / (v.id + ".ppm");
    const fs::path mask_path = cfg.dataset / "masks" / (v.id + ".pgm");
    if (fs::exists(pred_path) && fs::exists(mask_path)) {
      const RgbImage pred = io::ppm_read(pred_path);
      const RgbImage gt_rgb = ds.rgb(v.id);
      const BinaryMask object = io::mask_read_pgm(mask_path);
      if (!object.empty())
        report.add({v.id, "psnr", "object_mask",
                    metrics::psnr_masked(pred, gt_rgb, object, 255.0), object.count()});
      report.add({v.id, "psnr_outside", "object_mask_complement",
                  metrics::psnr_outside_mask(pred, gt_rgb, object, 255.0),
                  static_cast<std::int64_t>(object.values.size()) - object.count()});
    }
  }

  // Aligned-depth MAD for the reference view over the guide-usable area.
  const fs::path aligned_path = cfg.out / ("aligned_depth_" + ref + ".pfm");
  const auto d_bg = ds.depth_background(ref);
  if (fs::exists(aligned_path) && d_bg) {
    const DepthMap aligned{io::pfm_read(aligned_path)};
    const auto gt_u = ds.gt_unseen(ref);
    const fs::path unseen_path = cfg.out / "unseen" / (ref + ".pgm");
    BinaryMask region;
    if (fs::exists(unseen_path)) {
      region = io::mask_read_pgm(unseen_path);
    } else if (gt_u) {
      region = *gt_u;
    }
    if (region.count() > 0)
      report.add({ref, "depth_mad", "unseen", metrics::mad(aligned, *d_bg, region), region.count()});
  }

  report.write(cfg.out / "report.json");
}

namespace {

// FNV-1a over file bytes and strings; good enough for cache keys.
struct Hasher {
  std::uint64_t h = 1469598103934665603ull;
  void feed(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  }
  void feed(const std::string& s) { feed(s.data(), s.size()); }
  void feed_file(const fs::path& p) {
    if (!fs::exists(p)) {
      feed("missing");
      return;
    }
    feed(io::read_file(p));
  }
};

std::string stage_key(const PipelineConfig& cfg, const Dataset& ds, const std::string& stage) {
  Hasher h;
  h.feed(stage);
  h.feed_file(cfg.dataset / "cameras.json");
  std::ostringstream cfg_str;
  cfg_str << cfg.theta << "|" << (cfg.eps_d ? *cfg.eps_d : -1.0) << "|" << cfg.bbox_padding << "|"
          << cfg.close_radius << "|" << int(cfg.vote_average) << "|" << cfg.agdd.alpha << "|"
          << cfg.agdd.inner_iters << "|" << cfg.agdd.delta << "|" << cfg.agdd.bbox_margin << "|"
          << cfg.agdd.steps << "|" << cfg.agdd.beta_min << "|" << cfg.agdd.beta_max << "|"
          << cfg.agdd.seed << "|" << to_string(cfg.agdd.guide_region_mode) << "|" << cfg.prior_type
          << "|" << cfg.oracle.gamma << "|" << cfg.oracle.beta << "|" << cfg.oracle.track_below_t
          << "|" << cfg.seed << "|" << cfg.reference_view;
  h.feed(cfg_str.str());
  const std::string ref = reference_or_first(cfg, ds);
  if (stage == "unseen") {
    for (const io::ViewEntry& v : ds.views) {
      h.feed_file(cfg.dataset / "depth" / (v.id + ".pfm"));
      h.feed_file(cfg.dataset / "depth_incomplete" / (v.id + ".pfm"));
    }
    if (cfg.external_mask_dir)
      for (const io::ViewEntry& v : ds.views) h.feed_file(*cfg.external_mask_dir / (v.id + ".pgm"));
  } else if (stage == "align") {
    h.feed_file(cfg.dataset / "depth_incomplete" / (ref + ".pfm"));
    h.feed_file(cfg.dataset / "depth_background" / (ref + ".pfm"));
    h.feed_file(cfg.out / "unseen" / (ref + ".pgm"));
  } else if (stage == "unproject") {
    h.feed_file(cfg.out / "unseen" / (ref + ".pgm"));
    h.feed_file(cfg.out / ("aligned_depth_" + ref + ".pfm"));
    h.feed_file(cfg.dataset / "rgb" / (ref + ".ppm"));
  } else if (stage == "eval") {
    for (const io::ViewEntry& v : ds.views) {
      h.feed_file(cfg.out / "unseen" / (v.id + ".pgm"));
      h.feed_file(cfg.dataset / "gt_unseen" / (v.id + ".pgm"));
    }
    h.feed_file(cfg.out / ("aligned_depth_" + ref + ".pfm"));
  }
  std::ostringstream key;
  key << std::hex << h.h;
  return key.str();
}

bool cache_fresh(const fs::path& cache_file, const std::string& key) {
  if (!fs::exists(cache_file)) return false;
  return io::read_file(cache_file) == key;
}

}  // namespace

std::vector<std::string> run_pipeline(const PipelineConfig& cfg, bool force) {
  cfg.validate();
  const Dataset ds = open_dataset(cfg.dataset);
  const fs::path cache_dir = cfg.out / ".cache";
  fs::create_directories(cache_dir);

  std::vector<std::string> ran;
  const std::pair<std::string, void (*)(const PipelineConfig&)> stages[] = {
      {"unseen", &run_unseen},
      {"align", &run_align},
      {"unproject", &run_unproject},
      {"eval", &run_eval},
  };
  for (const auto& [name, fn] : stages) {
    const std::string key = stage_key(cfg, ds, name);
    const fs::path cache_file = cache_dir / (name + ".key");
    if (!force && cache_fresh(cache_file, key)) {
      std::cerr << "pipeline: stage " << name << " cached\n";
      continue;
    }
    try {
      fn(cfg);
    } catch (const Error&) {
      std::cerr << "pipeline: stage " << name << " failed\n";
      throw;
    }
    // Key may depend on this stage's own outputs (later stages hash them),
    // so recompute after running.
    io::write_file(cache_file, stage_key(cfg, ds, name));
    ran.push_back(name);
  }
  return ran;
}

}  // namespace scenefill::pipeline
