#include "bhsim/handoff.hpp"

#include <cmath>

namespace bhsim {

const char* to_string(HandoffOrigin o) {
  switch (o) {
    case HandoffOrigin::Legacy: return "legacy";
    case HandoffOrigin::Proactive: return "proactive";
    case HandoffOrigin::Fallback: return "fallback";
  }
  return "?";
}

const char* to_string(HandoffOutcome o) {
  switch (o) {
    case HandoffOutcome::Good: return "good";
    case HandoffOutcome::Bad: return "bad";
    case HandoffOutcome::Rlf: return "rlf";
  }
  return "?";
}

std::optional<int> legacy_decide(const std::vector<double>& serving_rsrp,
                                 const std::vector<std::vector<double>>& neighbor_rsrp,
                                 double sample_interval_ms, const LegacyConfig& cfg) {
  cfg.validate();
  if (sample_interval_ms <= 0.0) throw InvalidInput("sample interval must be positive");
  const std::size_t n = serving_rsrp.size();
  if (n == 0) return std::nullopt;
  int best = -1;
  double best_rsrp = 0.0;
  for (int j = 0; j < static_cast<int>(neighbor_rsrp.size()); ++j) {
    const auto& hist = neighbor_rsrp[j];
    if (hist.size() != n) throw InvalidInput("neighbor history length mismatch");
    // Trailing consecutive samples above serving + offset; each sample stands
    // for one report interval of sustained condition.
    double covered_ms = 0.0;
    for (std::size_t i = n; i-- > 0;) {
      if (hist[i] > serving_rsrp[i] + cfg.a3_offset_db) {
        covered_ms += sample_interval_ms;
      } else {
        break;
      }
    }
    if (covered_ms >= cfg.time_to_trigger_ms) {
      if (best < 0 || hist.back() > best_rsrp) {
        best = j;
        best_rsrp = hist.back();
      }
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

bool undegraded(double pre_rsrp_dbm, double post_rsrp_dbm, double threshold_db) {
  return post_rsrp_dbm >= pre_rsrp_dbm - threshold_db;
}

}  // namespace bhsim
