#include "bhsim/metrics.hpp"

#include <algorithm>
#include <limits>

namespace bhsim::metrics {

double average_accuracy(const std::vector<std::int32_t>& y_true,
                        const std::vector<std::int32_t>& y_pred) {
  if (y_true.empty() || y_true.size() != y_pred.size())
    throw InvalidInput("accuracy needs equal-length non-empty vectors");
  long hits = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i)
    if (y_true[i] == y_pred[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

ZeroOneVector zero_one(const std::vector<double>& s_hat, const std::vector<double>& s_base,
                       double epsilon) {
  if (s_hat.size() != s_base.size()) throw InvalidInput("zero-one vectors differ in length");
  if (epsilon < 0.0) throw InvalidInput("epsilon must be non-negative");
  ZeroOneVector out;
  out.epsilon = epsilon;
  out.entries.reserve(s_hat.size());
  for (std::size_t i = 0; i < s_hat.size(); ++i)
    out.entries.push_back((s_hat[i] - s_base[i]) > epsilon ? 1 : 0);
  return out;
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw InvalidInput("empty CDF sample set");
  std::sort(sorted_.begin(), sorted_.end());
  table_.reserve(sorted_.size());
  for (std::size_t i = 0; i < sorted_.size(); ++i) {
    // collapse duplicate values into a single step
    if (!table_.empty() && table_.back().value == sorted_[i]) {
      table_.back().cumulative = static_cast<double>(i + 1) / sorted_.size();
    } else {
      table_.push_back({sorted_[i], static_cast<double>(i + 1) / sorted_.size()});
    }
  }
}

double EmpiricalCdf::prob_leq(double x) const {
  auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / sorted_.size();
}

std::map<int, LookbackAggregate> aggregate_by_lookback(const std::vector<AccuracyReport>& reports) {
  std::map<int, LookbackAggregate> out;
  for (const AccuracyReport& r : reports) {
    auto& agg = out[r.lookback];
    if (agg.scope_count == 0) {
      agg.min = agg.max = r.accuracy;
      agg.mean = 0.0;
    }
    agg.min = std::min(agg.min, r.accuracy);
    agg.max = std::max(agg.max, r.accuracy);
    agg.mean += r.accuracy;
    ++agg.scope_count;
  }
  for (auto& [lb, agg] : out) agg.mean /= agg.scope_count;
  return out;
}

}  // namespace bhsim::metrics
