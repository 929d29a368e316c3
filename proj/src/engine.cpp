#include "bhsim/engine.hpp"

#include <algorithm>
#include <cmath>

namespace bhsim {

namespace {
constexpr std::uint64_t kMobilityTag = 0x5eed0002ULL;
constexpr std::uint64_t kModelInitTag = 0x1057a7e5ULL;
constexpr std::uint64_t kTrainTag = 0x7ea1c4edULL;
constexpr std::uint64_t kRandomPredTag = 0xfa11ba11ULL;

std::uint64_t scope_seed(std::uint64_t master, std::uint64_t tag, const ScopeKey& key) {
  std::uint64_t s = rng::mix(master, tag);
  s = rng::mix(s, static_cast<std::uint64_t>(static_cast<std::int64_t>(key.bs_id)));
  return rng::mix(s, static_cast<std::uint64_t>(static_cast<std::int64_t>(key.crnti)));
}
}  // namespace

const char* to_string(Mode m) {
  switch (m) {
    case Mode::DistributedWithCoords: return "distributed_with_coords";
    case Mode::DistributedNoCoords: return "distributed_no_coords";
    case Mode::Centralized: return "centralized";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  if (s == "distributed_with_coords") return Mode::DistributedWithCoords;
  if (s == "distributed_no_coords") return Mode::DistributedNoCoords;
  if (s == "centralized") return Mode::Centralized;
  throw ConfigError("unknown mode: " + s);
}

void EngineConfig::validate() const {
  grid.validate();
  radio.validate();
  legacy.validate();
  if (num_ues <= 0) throw ConfigError("UE count must be positive");
  if (frames <= 0) throw ConfigError("frame count must be positive");
  if (slots_per_frame < 1) throw ConfigError("slots per frame must be >= 1");
  if (r_training <= 0.0 || r_training >= 1.0) throw ConfigError("training fraction must be in (0,1)");
  if (model_width <= 0 || model_dense_layers < 0) throw ConfigError("bad model shape");
  if (model_dropout < 0.0 || model_dropout >= 1.0) throw ConfigError("dropout must be in [0,1)");
  if (training.epochs <= 0 || training.batch_size <= 0) throw ConfigError("bad training budget");
  if (min_train_windows < 1) throw ConfigError("min training windows must be >= 1");
  if (validation_accuracy_gate < 0.0 || validation_accuracy_gate > 1.0)
    throw ConfigError("validation gate must be in [0,1]");
  if (rlf_consecutive_frames < 1) throw ConfigError("RLF frame count must be >= 1");
  if (recovery_frames_intra < 1 || recovery_frames_inter < 1)
    throw ConfigError("recovery delays must be >= 1");
  if (retrain_interval_frames < 0) throw ConfigError("retrain interval must be >= 0");
  if (transfer_epoch_fraction <= 0.0 || transfer_epoch_fraction > 1.0)
    throw ConfigError("transfer epoch fraction must be in (0,1]");
  if (mobility.frame_duration_s <= 0.0) throw ConfigError("frame duration must be positive");
}

long EngineConfig::rrc_frames() const {
  double frames_per_report = legacy.rrc_report_interval_ms / (mobility.frame_duration_s * 1000.0);
  long n = std::lround(frames_per_report);
  return std::max<long>(n, 1);
}

std::string ScopeKey::str() const {
  if (crnti < 0) return "bs" + std::to_string(bs_id);
  return "bs" + std::to_string(bs_id) + "_ue" + std::to_string(crnti);
}

double ScopeResult::accuracy() const {
  if (y_true.empty()) return 0.0;
  long hits = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i)
    if (y_true[i] == y_pred[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

double EpisodeResult::pooled_accuracy() const {
  long hits = 0, total = 0;
  for (const ScopeResult& s : scopes) {
    for (std::size_t i = 0; i < s.y_true.size(); ++i) {
      if (s.y_true[i] == s.y_pred[i]) ++hits;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

long EpisodeResult::pooled_samples() const {
  long total = 0;
  for (const ScopeResult& s : scopes) total += s.samples();
  return total;
}

bool validation_gate(const nn::TrainHistory& history, double threshold) {
  if (history.val_accuracy.empty()) return false;
  return history.final_val_accuracy() >= threshold;
}

Learner* LearnerPool::find(int bs_id, int crnti) {
  ScopeKey key{bs_id, mode == Mode::Centralized ? -1 : crnti};
  auto it = learners.find(key);
  return it == learners.end() ? nullptr : &it->second;
}

const Learner* LearnerPool::find(int bs_id, int crnti) const {
  return const_cast<LearnerPool*>(this)->find(bs_id, crnti);
}

namespace {

PipelineConfig pipeline_config(const EngineConfig& cfg, Mode mode, int lookback,
                               long split_at_frame) {
  PipelineConfig p;
  p.lookback = lookback;
  p.lead = 0;
  p.lookahead = 1;
  p.include_crnti = (mode != Mode::Centralized);
  p.include_coords = (mode == Mode::DistributedWithCoords);
  p.slots_per_frame = cfg.slots_per_frame;
  p.r_training = cfg.r_training;
  p.split_at_frame = split_at_frame;
  return p;
}

// Groups per-(bs, ue) runs into per-scope sequence lists for the given mode.
std::map<ScopeKey, std::vector<std::vector<MeasurementRow>>> group_by_scope(const RunStore& runs,
                                                                            Mode mode) {
  std::map<ScopeKey, std::vector<std::vector<MeasurementRow>>> out;
  for (const auto& [key, seqs] : runs) {
    ScopeKey scope{key.first, mode == Mode::Centralized ? -1 : key.second};
    auto& dst = out[scope];
    for (const auto& seq : seqs) dst.push_back(seq);
  }
  return out;
}

Learner train_scope(const EngineConfig& cfg, Mode mode, int lookback, const ScopeKey& scope,
                    const std::vector<std::vector<MeasurementRow>>& seqs, long split_at_frame,
                    bool* ok) {
  Learner learner;
  learner.key = scope;
  *ok = false;

  PipelineConfig pcfg = pipeline_config(cfg, mode, lookback, split_at_frame);
  SupervisedFrame sf;
  try {
    sf = make_supervised_pooled(seqs, pcfg, &learner.fitted);
  } catch (const InvalidInput&) {
    return learner;  // not enough rows for even one window
  }
  if (sf.train_rows < cfg.min_train_windows || sf.num_classes < 1) return learner;

  nn::ModelConfig mcfg;
  mcfg.steps = sf.steps;
  mcfg.features_per_step = sf.features_per_step;
  mcfg.num_classes = sf.num_classes;
  mcfg.width = cfg.model_width;
  mcfg.dense_layers = cfg.model_dense_layers;
  mcfg.dropout_rate = cfg.model_dropout;
  mcfg.seed = scope_seed(cfg.seed, kModelInitTag, scope);

  nn::TrainConfig tcfg = cfg.training;
  tcfg.seed = scope_seed(cfg.seed, kTrainTag, scope);

  learner.model = std::make_unique<nn::Model>(mcfg, mcfg.seed);
  learner.history = learner.model->train(sf, tcfg);
  learner.class_to_beam = sf.class_to_beam;
  learner.train_windows = sf.train_rows;
  learner.val_windows = sf.validation_rows();
  learner.accepted =
      sf.validation_rows() > 0 && validation_gate(learner.history, cfg.validation_accuracy_gate);
  *ok = true;
  return learner;
}

}  // namespace

LearnerPool train_pool(const EngineConfig& cfg, Mode mode, int lookback, const RunStore& runs,
                       long pivot_frame) {
  cfg.validate();
  LearnerPool pool;
  pool.mode = mode;
  pool.lookback = lookback;
  for (const auto& [scope, seqs] : group_by_scope(runs, mode)) {
    bool ok = false;
    Learner learner = train_scope(cfg, mode, lookback, scope, seqs, pivot_frame, &ok);
    if (ok) pool.learners.emplace(scope, std::move(learner));
  }
  return pool;
}

void retrain_cycle(LearnerPool& pool, const EngineConfig& cfg, const RunStore& experience,
                   const std::set<std::pair<int, int>>& reassigned) {
  cfg.validate();
  auto grouped = group_by_scope(experience, pool.mode);

  std::set<ScopeKey> reassigned_scopes;
  if (pool.mode != Mode::Centralized) {
    for (const auto& [bs, ue] : reassigned) reassigned_scopes.insert(ScopeKey{bs, ue});
  }

  for (auto& [scope, learner] : pool.learners) {
    auto it = grouped.find(scope);
    if (it == grouped.end()) continue;  // no new experience: unchanged

    if (reassigned_scopes.count(scope)) {
      // Identifier continuity lost: warm-start transfer is not meaningful, so
      // the scope retrains from scratch on the fresh experience.
      bool ok = false;
      Learner fresh = train_scope(cfg, pool.mode, pool.lookback, scope, it->second, -1, &ok);
      if (ok) learner = std::move(fresh);
      continue;
    }
    if (!learner.model) continue;

    // Re-encode the fresh rows with the frozen pipeline so window geometry and
    // class vocabulary match the existing model.
    const FittedPipeline& fitted = learner.fitted;
    const int k = fitted.cfg.lookback;
    const int L = fitted.cfg.lookahead;
    std::vector<Eigen::RowVectorXd> xs;
    std::vector<int> labels;
    for (const auto& seq : it->second) {
      for (long t = k; t + L < static_cast<long>(seq.size()); ++t) {
        std::vector<MeasurementRow> window(seq.begin() + (t - k), seq.begin() + t + 1);
        xs.push_back(fitted.encode_window(window));
        labels.push_back(fitted.encoder.class_of(seq[t + L].current_beam));
      }
    }
    if (xs.empty()) continue;

    SupervisedFrame sf;
    sf.steps = k + 1;
    sf.features_per_step = 2 * fitted.encoder.width();
    sf.num_classes = static_cast<int>(fitted.encoder.beam_vocab().size());
    sf.class_to_beam.assign(fitted.encoder.beam_vocab().begin(), fitted.encoder.beam_vocab().end());
    sf.X.resize(static_cast<long>(xs.size()), xs[0].cols());
    for (long i = 0; i < sf.X.rows(); ++i) sf.X.row(i) = xs[static_cast<std::size_t>(i)];
    sf.labels = labels;
    // Hold out the trailing fraction of the fresh windows to refresh the gate.
    long train = static_cast<long>(std::floor(cfg.r_training * static_cast<double>(sf.X.rows())));
    sf.train_rows = std::max<long>(train, 1);

    int transfer_epochs = std::max(
        1, static_cast<int>(std::lround(cfg.transfer_epoch_fraction * cfg.training.epochs)));
    nn::TrainConfig tcfg = cfg.training;
    tcfg.seed = scope_seed(cfg.seed, kTrainTag, scope);
    learner.history = learner.model->transfer(sf, tcfg, transfer_epochs);
    learner.train_windows = sf.train_rows;
    learner.val_windows = sf.X.rows() - sf.train_rows;
    learner.accepted = learner.val_windows > 0 &&
                       validation_gate(learner.history, cfg.validation_accuracy_gate);
  }
}

namespace {

// Mutable per-UE simulation state shared by the legacy pass and the proactive
// replay; copying the whole vector snapshots the world at the pivot frame.
struct UeSim {
  UeState ue;
  rng::Stream mobility;
  GlobalBeamId serving{};
  GlobalBeamId prev_optimal{};
  int rlf_streak = 0;
  int recovery_left = 0;

  // Legacy RRC bookkeeping: per-BS best-beam RSRP at report instants.
  std::vector<std::vector<double>> bs_hist;

  // Proactive bookkeeping.
  std::vector<MeasurementRow> buffer;  // trailing rows under the current scope
  int buffer_bs = -1;
  long buffer_last_frame = -1;
  struct Pending {
    GlobalBeamId beam{};      // invalid for the perfect-predictor override
    double pre_rsrp_dbm = 0.0;
    ScopeKey scope{};
  };
  std::optional<Pending> pending;
};

class EpisodeRunner {
 public:
  EpisodeRunner(const EngineConfig& cfg, Mode mode, int lookback, PredictorOverride ov)
      : cfg_(cfg), mode_(mode), lookback_(lookback), override_(ov),
        grid_(StreetGrid::build(cfg.grid)), radio_(grid_, cfg.radio, cfg.seed) {
    rrc_frames_ = cfg_.rrc_frames();
    pivot_ = split_index(cfg_.frames, cfg_.r_training, cfg_.slots_per_frame);
  }

  EpisodeResult run() {
    EpisodeResult res;
    res.mode = mode_;
    res.override_used = override_;
    res.lookback = lookback_;
    res.frames = cfg_.frames;
    res.pivot_frame = pivot_;

    init_ues();

    // Pass 1: legacy control over the whole episode; rows recorded throughout.
    std::vector<UeSim> snapshot;
    for (long f = 0; f < cfg_.frames; ++f) {
      if (f == pivot_) snapshot = sims_;
      if (f > 0) step_all();
      for (UeSim& s : sims_) step_policy(s, f, /*proactive=*/false, res);
    }
    std::vector<HandoffEvent> legacy_events = std::move(events_);
    events_.clear();

    if (override_ == PredictorOverride::None) {
      pool_ = train_pool(cfg_, mode_, lookback_, runs_, pivot_);
      for (const auto& [scope, learner] : pool_.learners) {
        ScopeResult& sr = scope_result(scope);
        sr.trained = true;
        sr.accepted = learner.accepted;
        sr.train_windows = learner.train_windows;
        sr.val_windows = learner.val_windows;
        sr.history = learner.history;
        if (res.feature_columns.empty() && learner.model)
          res.feature_columns = learner.fitted.encoder.names();
      }
    } else {
      pool_.mode = mode_;
      pool_.lookback = lookback_;
    }

    // Pass 2: proactive replay of the validation span from the pivot snapshot.
    // The snapshot was taken before stepping into the pivot frame, so every
    // replayed frame (the pivot included) starts with a mobility step.
    sims_ = std::move(snapshot);
    replay_ = true;
    replay_runs_.clear();
    last_retrain_ = pivot_;
    for (long f = pivot_; f < cfg_.frames; ++f) {
      step_all();
      for (UeSim& s : sims_) step_policy(s, f, /*proactive=*/true, res);
      if (cfg_.retrain_interval_frames > 0 && override_ == PredictorOverride::None &&
          f - last_retrain_ >= cfg_.retrain_interval_frames) {
        retrain_cycle(pool_, cfg_, replay_runs_);
        replay_runs_.clear();
        last_retrain_ = f;
      }
    }

    for (const HandoffEvent& e : legacy_events)
      if (e.frame < pivot_) res.events.push_back(e);
    res.events.insert(res.events.end(), events_.begin(), events_.end());
    for (auto& [scope, sr] : scope_results_) res.scopes.push_back(std::move(sr));
    return res;
  }

 private:
  void init_ues() {
    std::vector<UeState> ues = spawn_ues(grid_, cfg_.num_ues, cfg_.seed);
    sims_.clear();
    sims_.reserve(ues.size());
    for (UeState& ue : ues) {
      UeSim s;
      s.ue = ue;
      s.mobility = rng::substream(cfg_.seed, kMobilityTag, ue.crnti);
      s.bs_hist.assign(grid_.num_bs(), {});
      // Initial attachment: the measured optimal beam at spawn.
      std::vector<double> table = radio_.rsrp_table(s.ue, 0);
      s.serving = radio_.optimal_beam(table);
      sims_.push_back(std::move(s));
    }
  }

  void step_all() {
    for (UeSim& s : sims_)
      s.ue = step_mobility(s.ue, cfg_.mobility.frame_duration_s, grid_, cfg_.mobility, s.mobility);
  }

  ScopeResult& scope_result(const ScopeKey& key) {
    auto [it, inserted] = scope_results_.try_emplace(key);
    if (inserted) it->second.key = key;
    return it->second;
  }

  int serving_bs(const UeSim& s) const { return radio_.codec().decode(s.serving).first; }

  GlobalBeamId best_on_bs(const std::vector<double>& table, int bs) const {
    const BeamCodec& codec = radio_.codec();
    GlobalBeamId best = codec.encode(bs, 0);
    for (int b = 1; b < cfg_.radio.beams_per_bs; ++b) {
      GlobalBeamId cand = codec.encode(bs, b);
      if (table[cand.value] > table[best.value]) best = cand;
    }
    return best;
  }

  void emit_row(UeSim& s, long f, const std::vector<double>& table, bool rlf, EpisodeResult& res) {
    MeasurementRow row = radio_.measure(s.ue, f, table, s.prev_optimal, rlf);
    int bs = serving_bs(s);
    if (!replay_) {
      res.rows.push_back(row);
      append_run(runs_, bs, s.ue.crnti, row);
    } else {
      append_run(replay_runs_, bs, s.ue.crnti, row);
    }
    if (s.buffer_bs != bs || s.buffer_last_frame != f - 1) s.buffer.clear();
    s.buffer.push_back(row);
    s.buffer_bs = bs;
    s.buffer_last_frame = f;
    if (static_cast<int>(s.buffer.size()) > lookback_ + 1)
      s.buffer.erase(s.buffer.begin(), s.buffer.end() - (lookback_ + 1));
  }

  static void append_run(RunStore& store, int bs, std::uint32_t crnti, const MeasurementRow& row) {
    auto& seqs = store[{bs, static_cast<int>(crnti)}];
    if (!seqs.empty() && seqs.back().back().frame == row.frame - 1) {
      seqs.back().push_back(row);
    } else {
      seqs.push_back({row});
    }
  }

  void start_recovery(UeSim& s, GlobalBeamId optimal_now) {
    bool intra = radio_.codec().decode(optimal_now).first == serving_bs(s);
    s.recovery_left = intra ? cfg_.recovery_frames_intra : cfg_.recovery_frames_inter;
    s.ue.llm_paused = true;
    s.pending.reset();
    s.buffer.clear();
    s.rlf_streak = 0;
    for (auto& h : s.bs_hist) h.clear();
  }

  void log_event(long f, const UeSim& s, GlobalBeamId source, GlobalBeamId target,
                 HandoffOrigin origin, HandoffOutcome outcome) {
    HandoffEvent e;
    e.frame = f;
    e.crnti = s.ue.crnti;
    e.source = source;
    e.target = target;
    e.origin = origin;
    e.intra_bs = radio_.codec().decode(source).first == radio_.codec().decode(target).first;
    e.outcome = outcome;
    events_.push_back(e);
  }

  void count_rlf(long f, EpisodeResult& res) {
    if (replay_) {
      ++res.proactive_rlf_validation;
    } else if (f >= pivot_) {
      ++res.legacy_rlf_validation;
    }
  }

  void step_policy(UeSim& s, long f, bool proactive, EpisodeResult& res) {
    std::vector<double> table = radio_.rsrp_table(s.ue, f);
    GlobalBeamId optimal = radio_.optimal_beam(table);

    if (!replay_) sample_coherence(s, res);

    // Service interruption: sit out the recovery window, then reattach to the
    // measured optimal beam.
    if (s.recovery_left > 0) {
      if (replay_) ++res.interruption_frames;
      if (--s.recovery_left == 0) {
        log_event(f, s, s.serving, optimal, HandoffOrigin::Fallback, HandoffOutcome::Good);
        s.serving = optimal;
        s.ue.serving_beam = optimal;
        s.ue.llm_paused = false;
      }
      s.prev_optimal = optimal;
      return;
    }

    bool proactive_controlled = false;
    bool row_rlf = false;

    // Resolve the prediction made one frame ago.
    if (proactive && s.pending) {
      UeSim::Pending pending = *s.pending;
      s.pending.reset();
      GlobalBeamId predicted =
          (override_ == PredictorOverride::Perfect) ? optimal : pending.beam;
      ScopeResult& sr = scope_result(pending.scope);
      sr.y_true.push_back(optimal.value);
      sr.y_pred.push_back(predicted.value);
      proactive_controlled = true;

      if (predicted != s.serving) {
        double post = table[static_cast<std::size_t>(predicted.value)];
        HandoffOutcome outcome = HandoffOutcome::Good;
        if (post < cfg_.rlf_threshold_dbm) {
          outcome = HandoffOutcome::Rlf;
        } else if (!undegraded(pending.pre_rsrp_dbm, post, cfg_.undegraded_threshold_db)) {
          outcome = HandoffOutcome::Bad;
        }
        log_event(f, s, s.serving, predicted, HandoffOrigin::Proactive, outcome);
        s.serving = predicted;
        s.ue.previous_beam = s.ue.serving_beam;
        s.ue.serving_beam = predicted;
        if (outcome != HandoffOutcome::Good) {
          if (outcome == HandoffOutcome::Rlf) count_rlf(f, res);
          emit_row(s, f, table, outcome == HandoffOutcome::Rlf, res);
          start_recovery(s, optimal);
          s.prev_optimal = optimal;
          return;
        }
      }
    }

    // Radio-link failure on the serving beam.
    if (table[static_cast<std::size_t>(s.serving.value)] < cfg_.rlf_threshold_dbm) {
      ++s.rlf_streak;
    } else {
      s.rlf_streak = 0;
    }
    if (s.rlf_streak >= cfg_.rlf_consecutive_frames) {
      count_rlf(f, res);
      row_rlf = true;
      emit_row(s, f, table, true, res);
      start_recovery(s, optimal);
      s.prev_optimal = optimal;
      return;
    }

    // Legacy control for frames (or scopes) without proactive coverage.
    if (!proactive_controlled) {
      int sbs = serving_bs(s);
      GlobalBeamId best_local = best_on_bs(table, sbs);
      if (best_local != s.serving) {
        log_event(f, s, s.serving, best_local, HandoffOrigin::Legacy, HandoffOutcome::Good);
        s.serving = best_local;
        s.ue.previous_beam = s.ue.serving_beam;
        s.ue.serving_beam = best_local;
      }
      if (f > 0 && f % rrc_frames_ == 0) legacy_inter(s, f, table);
    }

    emit_row(s, f, table, row_rlf, res);

    // Form the prediction for the next frame.
    if (proactive && f + 1 < cfg_.frames) form_pending(s, f, table);

    s.prev_optimal = optimal;
  }

  void legacy_inter(UeSim& s, long f, const std::vector<double>& table) {
    int sbs = serving_bs(s);
    for (int bs = 0; bs < grid_.num_bs(); ++bs) {
      GlobalBeamId best = best_on_bs(table, bs);
      s.bs_hist[bs].push_back(table[static_cast<std::size_t>(best.value)]);
      if (static_cast<long>(s.bs_hist[bs].size()) > kMaxRrcHistory)
        s.bs_hist[bs].erase(s.bs_hist[bs].begin());
    }
    std::vector<std::vector<double>> neighbors;
    std::vector<int> neighbor_bs;
    for (int bs = 0; bs < grid_.num_bs(); ++bs) {
      if (bs == sbs) continue;
      neighbors.push_back(s.bs_hist[bs]);
      neighbor_bs.push_back(bs);
    }
    std::optional<int> pick = legacy_decide(s.bs_hist[sbs], neighbors,
                                            cfg_.legacy.rrc_report_interval_ms, cfg_.legacy);
    if (!pick) return;
    int target_bs = neighbor_bs[static_cast<std::size_t>(*pick)];
    GlobalBeamId target = best_on_bs(table, target_bs);
    double pre = table[static_cast<std::size_t>(s.serving.value)];
    double post = table[static_cast<std::size_t>(target.value)];
    HandoffOutcome outcome = undegraded(pre, post, cfg_.undegraded_threshold_db)
                                 ? HandoffOutcome::Good
                                 : HandoffOutcome::Bad;
    log_event(f, s, s.serving, target, HandoffOrigin::Legacy, outcome);
    s.serving = target;
    s.ue.previous_beam = s.ue.serving_beam;
    s.ue.serving_beam = target;
    for (auto& h : s.bs_hist) h.clear();
  }

  void form_pending(UeSim& s, long f, const std::vector<double>& table) {
    (void)f;
    int sbs = serving_bs(s);
    ScopeKey scope{sbs, mode_ == Mode::Centralized ? -1 : static_cast<int>(s.ue.crnti)};
    double pre = table[static_cast<std::size_t>(s.serving.value)];

    if (override_ == PredictorOverride::Perfect) {
      s.pending = UeSim::Pending{GlobalBeamId{}, pre, scope};
      for (auto& h : s.bs_hist) h.clear();
      return;
    }
    if (override_ == PredictorOverride::UniformRandom) {
      rng::Stream& stream = random_pred_stream(s.ue.crnti);
      int local = static_cast<int>(stream.below(static_cast<std::uint64_t>(cfg_.radio.beams_per_bs)));
      s.pending = UeSim::Pending{radio_.codec().encode(sbs, local), pre, scope};
      for (auto& h : s.bs_hist) h.clear();
      return;
    }

    Learner* learner = pool_.find(sbs, static_cast<int>(s.ue.crnti));
    if (!learner || !learner->accepted || !learner->model) return;
    if (static_cast<int>(s.buffer.size()) != lookback_ + 1) return;

    Eigen::RowVectorXd window = learner->fitted.encode_window(s.buffer);
    auto [beam, prob] = nn::predict_next_beam(*learner->model, window, learner->class_to_beam);
    (void)prob;
    s.pending = UeSim::Pending{beam, pre, scope};
    for (auto& h : s.bs_hist) h.clear();
  }

  // One beam-coherence-time sample per (frame, UE) against the serving BS;
  // capped at the episode duration for degenerate geometry.
  void sample_coherence(const UeSim& s, EpisodeResult& res) {
    const BsSite& bs = grid_.sites()[static_cast<std::size_t>(serving_bs(s))];
    double d = grid_.distance(s.ue.x, s.ue.y, bs.x, bs.y);
    double cap = static_cast<double>(cfg_.frames) * cfg_.mobility.frame_duration_s;
    if (d <= 1e-9) {
      res.coherence_samples_s.push_back(0.0);
      return;
    }
    double alpha = heading_angle(s.ue, bs, grid_);
    double theta = cfg_.radio.beamwidth_3db_deg * 3.14159265358979323846 / 180.0;
    res.coherence_samples_s.push_back(coherence_time(d, s.ue.speed_mps, alpha, theta, cap));
  }

  rng::Stream& random_pred_stream(std::uint32_t crnti) {
    auto it = random_streams_.find(crnti);
    if (it == random_streams_.end()) {
      it = random_streams_.emplace(crnti, rng::substream(cfg_.seed, kRandomPredTag, crnti)).first;
    }
    return it->second;
  }

  static constexpr long kMaxRrcHistory = 64;

  EngineConfig cfg_;
  Mode mode_;
  int lookback_;
  PredictorOverride override_;
  StreetGrid grid_;
  RadioModel radio_;
  long rrc_frames_ = 1;
  long pivot_ = 0;

  std::vector<UeSim> sims_;
  std::vector<HandoffEvent> events_;
  RunStore runs_;
  RunStore replay_runs_;
  LearnerPool pool_;
  std::map<ScopeKey, ScopeResult> scope_results_;
  std::map<std::uint32_t, rng::Stream> random_streams_;
  bool replay_ = false;
  long last_retrain_ = 0;
};

}  // namespace

EpisodeResult run_episode(const EngineConfig& cfg, Mode mode, int lookback,
                          PredictorOverride override_pred) {
  cfg.validate();
  if (lookback < 0) throw ConfigError("lookback must be >= 0");
  EpisodeRunner runner(cfg, mode, lookback, override_pred);
  return runner.run();
}

}  // namespace bhsim
