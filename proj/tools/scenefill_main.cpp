#include <CLI11.hpp>
#include <iostream>

#include "scenefill/pipeline.hpp"
#include "scenefill/synth.hpp"

namespace {

using scenefill::ConfigError;
using scenefill::DataError;

struct CommonArgs {
  std::string config_path;
  std::string out;
  bool force = false;
  int workers = -1;
  std::int64_t seed = -1;
};

scenefill::pipeline::PipelineConfig load_config(const CommonArgs& args) {
  if (args.config_path.empty()) throw ConfigError("--config is required");
  auto cfg = scenefill::pipeline::config_read(args.config_path);
  if (!args.out.empty()) cfg.out = args.out;
  if (args.workers >= 0) cfg.workers = args.workers;
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool with_force = false) {
  cmd->add_option("--config", args.config_path, "pipeline config JSON")->required();
  cmd->add_option("--out", args.out, "output directory (overrides config)");
  cmd->add_option("--workers", args.workers, "worker threads (0 = logical cores)");
  cmd->add_option("--seed", args.seed, "seed override");
  if (with_force) cmd->add_flag("--force", args.force, "rerun stages even if cached");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scenefill: depth-warped unseen masks, guided depth alignment, point initialization"};
  app.require_subcommand(1);

  std::string scene_path, synth_out;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset from a scene spec");
  synth->add_option("scene", scene_path, "scene spec JSON")->required();
  synth->add_option("--out", synth_out, "dataset output directory")->required();

  CommonArgs unseen_args, align_args, unproject_args, eval_args, pipeline_args;
  add_common(app.add_subcommand("unseen", "unseen masks and bbox prompts"), unseen_args);
  add_common(app.add_subcommand("align", "guided depth alignment on the reference view"), align_args);
  add_common(app.add_subcommand("unproject", "reference-view point initialization"), unproject_args);
  add_common(app.add_subcommand("eval", "metric report"), eval_args);
  add_common(app.add_subcommand("pipeline", "unseen -> align -> unproject -> eval"), pipeline_args,
             true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const auto scene = scenefill::synth::scene_read(scene_path);
      scenefill::synth::write_dataset(scene, synth_out);
      std::cerr << "synth: wrote " << scene.views.size() << " views to " << synth_out << "\n";
      return 0;
    }
    if (app.get_subcommand("unseen")->parsed())
      scenefill::pipeline::run_unseen(load_config(unseen_args));
    if (app.get_subcommand("align")->parsed())
      scenefill::pipeline::run_align(load_config(align_args));
    if (app.get_subcommand("unproject")->parsed())
      scenefill::pipeline::run_unproject(load_config(unproject_args));
    if (app.get_subcommand("eval")->parsed()) scenefill::pipeline::run_eval(load_config(eval_args));
    if (app.get_subcommand("pipeline")->parsed()) {
      const auto cfg = load_config(pipeline_args);
      const auto ran = scenefill::pipeline::run_pipeline(cfg, pipeline_args.force);
      std::cerr << "pipeline: ran " << ran.size() << " stage(s)\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
