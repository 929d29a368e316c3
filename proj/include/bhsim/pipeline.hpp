#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bhsim/radio.hpp"

namespace bhsim {

struct PipelineConfig {
  int lookback = 0;       // k past shifts; window spans k+1 time steps
  int lead = 0;           // future shifts, offline experimentation only
  int lookahead = 1;      // L: label lies this many rows ahead
  bool include_crnti = true;
  bool include_coords = true;
  int slots_per_frame = 10;
  double r_training = 0.6;
  // When >= 0, windows whose label row lies before this radio frame form the
  // training split instead of the fraction-based pivot; keeps every scope's
  // training strictly inside the episode-wide training span.
  long split_at_frame = -1;
};

// Maps raw measurement rows to numeric base feature vectors. Categorical
// inputs (direction, beam ids) are one-hot over the vocabulary observed in
// the training span; beams outside the vocabulary encode as all-zeros.
class FeatureEncoder {
 public:
  FeatureEncoder() = default;
  FeatureEncoder(std::vector<std::int32_t> beam_vocab, bool include_crnti, bool include_coords);

  int width() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::int32_t>& beam_vocab() const { return beam_vocab_; }

  void encode(const MeasurementRow& row, double* out) const;
  Eigen::RowVectorXd encode(const MeasurementRow& row) const;

  // Dense class index of a beam id, or -1 when outside the vocabulary.
  int class_of(std::int32_t beam) const;

 private:
  std::vector<std::int32_t> beam_vocab_;
  bool include_crnti_ = true;
  bool include_coords_ = true;
  std::vector<std::string> names_;
};

// Per-column min-max fitted on training rows only; constant columns map to 0
// and out-of-range validation values are deliberately left unclamped.
class Scaler {
 public:
  void fit(const Eigen::MatrixXd& data, long train_rows);
  void apply(Eigen::MatrixXd& data) const;
  void apply_row(Eigen::RowVectorXd& row) const;
  int width() const { return static_cast<int>(mins_.size()); }
  double col_min(int c) const { return mins_[c]; }
  double col_max(int c) const { return maxs_[c]; }

 private:
  std::vector<double> mins_, maxs_;
};

struct SupervisedFrame {
  // One row per window, scaled; layout is steps * features_per_step with the
  // oldest time step first and [values | differences-from-current] per step.
  Eigen::MatrixXd X;
  std::vector<int> labels;                 // dense class index, -1 = unseen beam
  std::vector<std::int32_t> label_beams;   // raw global beam id per row
  std::vector<long> window_end_frame;      // radio frame of each window's last row
  std::vector<int> window_seq;             // source sequence of each window
  int steps = 0;
  int features_per_step = 0;
  int num_classes = 0;
  long train_rows = 0;                     // Eq.-(7)-style pivot index
  std::vector<int> class_to_beam;
  std::vector<std::string> column_catalog;

  long rows() const { return X.rows(); }
  long validation_rows() const { return X.rows() - train_rows; }
};

// The fitted state needed to encode fresh windows at inference time with the
// exact training-time transform.
struct FittedPipeline {
  PipelineConfig cfg;
  FeatureEncoder encoder;
  Scaler scaler;

  // Encodes the latest k+1 rows (oldest first) into one scaled X row.
  Eigen::RowVectorXd encode_window(const std::vector<MeasurementRow>& window) const;
};

// Block-wise time shift: columns [D_{t-k} | ... | D_t | ... | D_{t+l}],
// dropping the l+k rows with undefined shifted values.
Eigen::MatrixXd shift_lag(const Eigen::MatrixXd& data, int k, int l);

// Appends difference blocks to a shifted matrix: lag blocks hold
// x_t - x_{t-j}, lead blocks x_{t+j} - x_t, and the current block is zero,
// doubling the width to 2(l+k+1) columns per base feature.
Eigen::MatrixXd difference(const Eigen::MatrixXd& shifted, int k, int l, int n_base);

// Frame-aligned pivot: t* = floor(floor(r * m') / N) * N.
long split_index(long m_prime, double r_training, int slots_per_frame);

// Full assembly: encode, window, difference, split, scale, label.
SupervisedFrame make_supervised(const std::vector<MeasurementRow>& rows, const PipelineConfig& cfg,
                                FittedPipeline* fitted_out = nullptr);

// Same assembly over several row sequences pooled into one frame (one window
// never crosses a sequence boundary); windows are merged in time order and
// share a single vocabulary, scaler, and split.
SupervisedFrame make_supervised_pooled(const std::vector<std::vector<MeasurementRow>>& seqs,
                                       const PipelineConfig& cfg,
                                       FittedPipeline* fitted_out = nullptr);

}  // namespace bhsim
