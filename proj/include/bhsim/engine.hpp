#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bhsim/grid.hpp"
#include "bhsim/handoff.hpp"
#include "bhsim/mobility.hpp"
#include "bhsim/nn.hpp"
#include "bhsim/pipeline.hpp"
#include "bhsim/radio.hpp"

namespace bhsim {

// Who owns a learner: one per (serving BS, UE) pair in distributed modes, one
// per BS in centralized mode. The two distributed modes differ only in whether
// UE coordinates enter the feature set.
enum class Mode { DistributedWithCoords, DistributedNoCoords, Centralized };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

// Replaces the trained predictor during the proactive phase; used for bound
// and sanity experiments.
enum class PredictorOverride { None, Perfect, UniformRandom };

struct EngineConfig {
  GridConfig grid;
  MobilityConfig mobility;
  RadioConfig radio;
  LegacyConfig legacy;

  std::uint64_t seed = 0;
  int num_ues = 32;
  long frames = 5000;
  int slots_per_frame = 10;
  double r_training = 0.6;

  // Learner shape and budget.
  int model_width = 16;
  int model_dense_layers = 6;
  double model_dropout = 0.2;
  nn::TrainConfig training;
  long min_train_windows = 30;          // scopes below this stay on the legacy rule
  double validation_accuracy_gate = 0.7;

  // Proactive-phase protection.
  double undegraded_threshold_db = 3.0;
  double rlf_threshold_dbm = -110.0;
  int rlf_consecutive_frames = 3;
  int recovery_frames_intra = 5;
  int recovery_frames_inter = 10;

  // Optional periodic fine-tuning during the proactive phase; 0 disables.
  long retrain_interval_frames = 0;
  double transfer_epoch_fraction = 0.25;

  void validate() const;
  double frame_s() const { return mobility.frame_duration_s; }
  long rrc_frames() const;
};

struct ScopeKey {
  int bs_id = 0;
  int crnti = -1;  // -1 in centralized mode

  bool operator<(const ScopeKey& o) const {
    return bs_id != o.bs_id ? bs_id < o.bs_id : crnti < o.crnti;
  }
  bool operator==(const ScopeKey& o) const { return bs_id == o.bs_id && crnti == o.crnti; }
  std::string str() const;
};

struct Learner {
  ScopeKey key;
  FittedPipeline fitted;
  std::unique_ptr<nn::Model> model;
  nn::TrainHistory history;
  bool accepted = false;   // passed the validation-accuracy gate
  long train_windows = 0;
  long val_windows = 0;
  std::vector<int> class_to_beam;
};

// Per-(serving BS, UE) measurement runs; each inner vector is a maximal set of
// rows with consecutive frames under one serving BS.
using RunStore = std::map<std::pair<int, int>, std::vector<std::vector<MeasurementRow>>>;

struct LearnerPool {
  Mode mode = Mode::DistributedWithCoords;
  int lookback = 0;
  std::map<ScopeKey, Learner> learners;

  Learner* find(int bs_id, int crnti);
  const Learner* find(int bs_id, int crnti) const;
};

// One learner per scope from the recorded runs; training windows are those
// whose label precedes `pivot_frame`, later windows drive the validation gate.
LearnerPool train_pool(const EngineConfig& cfg, Mode mode, int lookback, const RunStore& runs,
                       long pivot_frame);

// Transfer-based fine-tuning on newly accumulated experience. Scopes listed in
// `reassigned` lost their C-RNTI continuity and retrain from scratch in
// distributed modes; scopes without new rows are left untouched. Learners that
// re-pass the validation gate re-engage proactive control.
void retrain_cycle(LearnerPool& pool, const EngineConfig& cfg, const RunStore& experience,
                   const std::set<std::pair<int, int>>& reassigned = {});

// Per-scope prediction log over the proactive phase: realized optimal beam vs
// the beam that was predicted one frame earlier.
struct ScopeResult {
  ScopeKey key;
  bool trained = false;
  bool accepted = false;
  long train_windows = 0;
  long val_windows = 0;
  nn::TrainHistory history;
  std::vector<std::int32_t> y_true;
  std::vector<std::int32_t> y_pred;

  long samples() const { return static_cast<long>(y_true.size()); }
  double accuracy() const;
};

struct EpisodeResult {
  Mode mode = Mode::DistributedWithCoords;
  PredictorOverride override_used = PredictorOverride::None;
  int lookback = 0;
  long frames = 0;
  long pivot_frame = 0;

  std::vector<MeasurementRow> rows;          // full legacy-phase dataset, time-major
  std::vector<HandoffEvent> events;          // legacy span + proactive replay span
  std::vector<ScopeResult> scopes;
  std::vector<double> coherence_samples_s;   // one per (frame, UE) sample
  std::vector<std::string> feature_columns;  // learner input catalog (audit aid)

  // Radio-link failures over the shared validation span, for the legacy
  // baseline pass and the proactive replay respectively.
  long legacy_rlf_validation = 0;
  long proactive_rlf_validation = 0;
  long interruption_frames = 0;              // proactive replay, frames in recovery

  // Prediction pairs pooled over every scope.
  double pooled_accuracy() const;
  long pooled_samples() const;
};

bool validation_gate(const nn::TrainHistory& history, double threshold);

// Full experiment for one (mode, lookback): legacy simulation over all frames,
// per-scope training at the pivot, proactive replay of the validation span.
EpisodeResult run_episode(const EngineConfig& cfg, Mode mode, int lookback,
                          PredictorOverride override_pred = PredictorOverride::None);

}  // namespace bhsim
