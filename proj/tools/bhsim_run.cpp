// Experiment runner: seeded beam-handoff simulation, per-scope training, and
// artifact/report emission. Exit codes: 0 success, 2 configuration error,
// 3 runtime error.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bhsim/artifacts.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Beam handoff prediction simulator"};

  std::string config_path;
  std::string preset = "desk";
  std::int64_t seed = -1;
  std::string mode;
  std::vector<int> lookbacks;
  std::string export_path;
  std::string output_dir;
  std::string report_dir;

  app.add_option("--config", config_path, "Configuration file (sectioned key = value)");
  app.add_option("--preset", preset, "Scenario preset")->check(CLI::IsMember({"desk", "paper"}));
  app.add_option("--seed", seed, "Master seed override");
  app.add_option("--mode", mode,
                 "distributed_with_coords | distributed_no_coords | centralized");
  app.add_option("--lookback", lookbacks, "Lookback value; repeatable")->expected(-1);
  app.add_option("--export-dataset", export_path, "Write the measurement dataset and exit");
  app.add_option("--output-dir", output_dir, "Artifact directory");
  app.add_option("--report", report_dir, "Rebuild the summary for an existing run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!report_dir.empty()) {
      bhsim::write_report(report_dir);
      return 0;
    }

    bhsim::ExperimentConfig cfg = bhsim::preset_by_name(preset);
    if (!config_path.empty()) bhsim::apply_config_file(cfg, config_path);
    if (seed >= 0) cfg.engine.seed = static_cast<std::uint64_t>(seed);
    if (!mode.empty()) cfg.mode = bhsim::mode_from_string(mode);
    if (!lookbacks.empty()) cfg.lookbacks = lookbacks;
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    cfg.validate();

    if (!export_path.empty()) {
      bhsim::export_dataset_for(cfg, export_path);
      return 0;
    }

    bhsim::run_experiment(cfg);
    return 0;
  } catch (const bhsim::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
