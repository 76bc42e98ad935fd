// Command-line front end for the multi-timescale pattern mining pipeline:
//   ingest | synth -> fit | cc-scan -> cluster -> stats -> report
// One JSON configuration file drives every stage; --set overrides single
// keys, and each stage restarts from the artifacts of the previous one.

#include <CLI11.hpp>

#include "cadence/cadence.hpp"

#include <exception>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  int threads = 0;  // 0: keep the config value
};

cadence::PipelineConfig resolve_config(const CommonOptions& opts) {
  cadence::Json json = cadence::Json::parse(cadence::read_file(opts.config_path));
  for (const auto& kv : opts.overrides) cadence::apply_override(json, kv);
  cadence::PipelineConfig cfg = cadence::config_from_json(json);
  if (opts.threads > 0) cfg.threads = opts.threads;
  return cfg;
}

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "pipeline configuration (JSON)")
      ->required();
  cmd->add_option("--set", opts.overrides,
                  "override a config key, e.g. --set fit.rank=4");
  cmd->add_option("--threads", opts.threads, "worker thread cap");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-timescale transaction pattern mining"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::function<cadence::Json(const cadence::PipelineConfig&)> action;

  const auto register_cmd = [&](const std::string& name, const std::string& help,
                                cadence::Json (*fn)(const cadence::PipelineConfig&)) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common(cmd, opts);
    cmd->callback([&action, fn] { action = fn; });
  };

  register_cmd("ingest", "build the count tensor from a receipts CSV",
               &cadence::run_ingest);
  register_cmd("synth", "generate a synthetic population with ground truth",
               &cadence::run_synth);
  register_cmd("fit", "factorize the tensor (best of n_runs restarts)",
               &cadence::run_fit);
  register_cmd("cc-scan", "score candidate ranks by core consistency",
               &cadence::run_ccscan);
  register_cmd("cluster", "cluster users by component membership shares",
               &cadence::run_cluster);
  register_cmd("stats", "demographic tests, representative groups, overlaps",
               &cadence::run_stats);
  register_cmd("report", "collect the plot-ready tables and run manifest",
               &cadence::run_report);

  CLI11_PARSE(app, argc, argv);

  try {
    action(resolve_config(opts));
  } catch (const std::exception& e) {
    cadence::log_error(e.what());
    return 1;
  }
  return 0;
}
