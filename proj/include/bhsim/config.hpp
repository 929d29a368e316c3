#pragma once

#include <string>
#include <vector>

#include "bhsim/engine.hpp"

namespace bhsim {

// Everything one run needs: scenario, mode, lookback sweep, output location.
struct ExperimentConfig {
  EngineConfig engine;
  Mode mode = Mode::DistributedNoCoords;
  std::vector<int> lookbacks;
  std::string output_dir = "out";
  std::string preset_name = "desk";

  void validate() const;
};

// Small scenario: 4 BSs (2x2), 16 UEs, 500 frames, a reduced epoch budget and
// the lookback subset {0, 2, 4, 7, 8}; finishes in minutes on one core.
ExperimentConfig desk_preset();

// Full-scale scenario: 32 BSs (8x4), 400 UEs, 5000 frames, 192 epochs,
// lookbacks 0..10.
ExperimentConfig paper_preset();

ExperimentConfig preset_by_name(const std::string& name);

// Applies a flat sectioned key-value file ("[section]" headers, "key = value"
// lines, '#' or ';' comments) on top of an existing configuration.
void apply_config_file(ExperimentConfig& cfg, const std::string& path);

// Single key override, section-qualified ("run.seed"); used by both the file
// loader and tests.
void apply_config_entry(ExperimentConfig& cfg, const std::string& section,
                        const std::string& key, const std::string& value);

// Canonical echo of a configuration, readable back by apply_config_file; the
// run manifest embeds this.
std::string render_config(const ExperimentConfig& cfg);

}  // namespace bhsim
