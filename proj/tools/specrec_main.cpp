#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "specrec/pipeline.hpp"

namespace {

void apply_env_overrides(specrec::RunConfig& cfg) {
  if (const char* dir = std::getenv("SPECREC_CACHE_DIR")) {
    cfg.cache_dir = dir;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral collaborative-filtering pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string grid_path;
  std::string out_path;
  std::string ablation_override;

  CLI::App* cmd_run = app.add_subcommand("run", "single end-to-end evaluation");
  cmd_run->add_option("--config", config_path, "run config file")->required();
  cmd_run->add_option("--ablation", ablation_override,
                      "override ablation mode (full|no-bandpass|no-lowpass|no-seq)");
  cmd_run->add_option("--out", out_path, "write the metric table CSV here");

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "grid sweep over filter parameters");
  cmd_sweep->add_option("--config", config_path, "run config file")->required();
  cmd_sweep->add_option("--grid", grid_path, "grid file")->required();
  cmd_sweep->add_option("--out", out_path, "sweep CSV output path")->required();

  CLI::App* cmd_baseline = app.add_subcommand("baseline", "popularity baseline evaluation");
  cmd_baseline->add_option("--config", config_path, "run config file")->required();
  cmd_baseline->add_option("--out", out_path, "write the metric table CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    specrec::RunConfig cfg = specrec::load_run_config(config_path);
    apply_env_overrides(cfg);

    if (cmd_run->parsed()) {
      if (!ablation_override.empty()) {
        cfg.ablation = specrec::ablation_from_string(ablation_override);
      }
      specrec::RunReport report = specrec::run(cfg);
      std::cout << specrec::report_text(report);
      if (!out_path.empty()) {
        specrec::write_text_atomic(out_path, specrec::to_csv(report.metrics));
      }
    } else if (cmd_sweep->parsed()) {
      specrec::SweepGrid grid = specrec::load_sweep_grid(grid_path);
      std::string csv = specrec::sweep(cfg, grid);
      specrec::write_text_atomic(out_path, csv);
      std::cout << "sweep written to " << out_path << "\n";
    } else if (cmd_baseline->parsed()) {
      specrec::RunReport report = specrec::run_baseline(cfg);
      std::cout << specrec::report_text(report);
      if (!out_path.empty()) {
        specrec::write_text_atomic(out_path, specrec::to_csv(report.metrics));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
