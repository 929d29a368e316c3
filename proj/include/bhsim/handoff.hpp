#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bhsim/beam_codec.hpp"
#include "bhsim/errors.hpp"

namespace bhsim {

struct LegacyConfig {
  double a3_offset_db = 3.0;
  double time_to_trigger_ms = 160.0;
  double rrc_report_interval_ms = 120.0;  // standards floor
  double llm_report_interval_ms = 10.0;   // standards floor

  void validate() const {
    if (a3_offset_db < 0.0) throw ConfigError("A3 offset must be non-negative");
    if (time_to_trigger_ms <= 0.0) throw ConfigError("TTT must be positive");
    if (rrc_report_interval_ms < 120.0) throw ConfigError("RRC report interval floor is 120 ms");
    if (llm_report_interval_ms < 10.0) throw ConfigError("LLM report interval floor is 10 ms");
  }
};

enum class HandoffOrigin { Legacy, Proactive, Fallback };
enum class HandoffOutcome { Good, Bad, Rlf };

const char* to_string(HandoffOrigin o);
const char* to_string(HandoffOutcome o);

struct HandoffEvent {
  long frame = 0;
  std::uint32_t crnti = 0;
  GlobalBeamId source{};
  GlobalBeamId target{};
  HandoffOrigin origin = HandoffOrigin::Legacy;
  bool intra_bs = false;
  HandoffOutcome outcome = HandoffOutcome::Good;
};

struct PredictionAssessment {
  GlobalBeamId predicted{};
  GlobalBeamId realized_optimal{};
  double rsrp_delta_db = 0.0;  // post-switch minus pre-switch
  bool good = false;
};

// A3 rule over RSRP histories sampled at `sample_interval_ms` (most recent
// sample last). A neighbor qualifies once it has exceeded serving + offset on
// enough trailing consecutive samples to cover the time-to-trigger; the
// strongest qualifying neighbor (by latest sample) wins. Returns its index.
std::optional<int> legacy_decide(const std::vector<double>& serving_rsrp,
                                 const std::vector<std::vector<double>>& neighbor_rsrp,
                                 double sample_interval_ms, const LegacyConfig& cfg);

// Un-degraded check: post-switch RSRP within `threshold_db` of pre-switch
// RSRP, or better.
bool undegraded(double pre_rsrp_dbm, double post_rsrp_dbm, double threshold_db);

}  // namespace bhsim
