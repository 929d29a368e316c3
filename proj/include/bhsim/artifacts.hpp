#pragma once

#include <string>

#include "bhsim/config.hpp"

namespace bhsim {

// Runs every configured lookback for the configured mode and writes the full
// artifact tree into cfg.output_dir:
//   manifest.txt                      config echo + seed + version
//   events_<mode>_lb<k>.csv           handoff event log per episode
//   history_<mode>_lb<k>.csv          per-scope training curves
//   accuracy_scopes_<mode>.csv        per-scope prediction accuracy
//   accuracy_<mode>.csv               pooled accuracy per lookback
//   spread_<mode>.csv                 min/mean/max scope accuracy per lookback
//   columns_<mode>_lb<k>.txt          learner input column catalog
//   coherence.csv                     beam coherence time empirical CDF
//   summary.txt                       cross-mode report (refreshed per run)
void run_experiment(const ExperimentConfig& cfg);

// Rebuilds summary.txt from the accuracy tables already present in `run_dir`,
// comparing every mode against the no-coordinates distributed baseline with
// the zero-one score (epsilon 0.03).
void write_report(const std::string& run_dir);

// Simulates the configured scenario under legacy control only and writes the
// measurement dataset to `path`.
void export_dataset_for(const ExperimentConfig& cfg, const std::string& path);

}  // namespace bhsim
