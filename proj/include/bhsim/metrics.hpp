#pragma once

#include <map>
#include <string>
#include <vector>

#include "bhsim/errors.hpp"

namespace bhsim::metrics {

struct AccuracyReport {
  std::string scope;
  int lookback = 0;
  double accuracy = 0.0;
  long sample_count = 0;
  double rlf_rate() const { return 1.0 - accuracy; }
};

struct ZeroOneVector {
  std::vector<int> entries;
  double epsilon = 0.0;
};

// Mean of exact-match indicators.
double average_accuracy(const std::vector<std::int32_t>& y_true,
                        const std::vector<std::int32_t>& y_pred);

// alpha = 1[(s_hat - s_base) > eps], elementwise with strict inequality.
ZeroOneVector zero_one(const std::vector<double>& s_hat, const std::vector<double>& s_base,
                       double epsilon);

struct CdfPoint {
  double value;
  double cumulative;
};

class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples);
  const std::vector<CdfPoint>& table() const { return table_; }
  double prob_leq(double x) const;
  double fraction_above(double x) const { return 1.0 - prob_leq(x); }

 private:
  std::vector<double> sorted_;
  std::vector<CdfPoint> table_;
};

struct LookbackAggregate {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  int scope_count = 0;
};

std::map<int, LookbackAggregate> aggregate_by_lookback(const std::vector<AccuracyReport>& reports);

}  // namespace bhsim::metrics
