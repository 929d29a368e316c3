#include "bhsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bhsim/errors.hpp"

namespace bhsim {

FeatureEncoder::FeatureEncoder(std::vector<std::int32_t> beam_vocab, bool include_crnti,
                               bool include_coords)
    : beam_vocab_(std::move(beam_vocab)),
      include_crnti_(include_crnti),
      include_coords_(include_coords) {
  std::sort(beam_vocab_.begin(), beam_vocab_.end());
  beam_vocab_.erase(std::unique(beam_vocab_.begin(), beam_vocab_.end()), beam_vocab_.end());
  // The absolute frame index is deliberately not a learner input: it is pure
  // wall-clock identity, lets a model memorize the training span, and is
  // always out of range on the validation span. It stays in the dataset rows
  // for alignment and audit, but never enters the feature matrix.
  if (include_crnti_) names_.push_back("crnti");
  for (std::int32_t b : beam_vocab_) names_.push_back("cur_beam[" + std::to_string(b) + "]");
  for (std::int32_t b : beam_vocab_) names_.push_back("prev_beam[" + std::to_string(b) + "]");
  names_.push_back("beam_rsrp_dbm");
  names_.push_back("beam_sinr_db");
  for (const char* d : {"N", "E", "S", "W"}) names_.push_back(std::string("dir[") + d + "]");
  names_.push_back("speed_mps");
  if (include_coords_) {
    names_.push_back("x_m");
    names_.push_back("y_m");
  }
  names_.push_back("rlf");
}

int FeatureEncoder::class_of(std::int32_t beam) const {
  auto it = std::lower_bound(beam_vocab_.begin(), beam_vocab_.end(), beam);
  if (it == beam_vocab_.end() || *it != beam) return -1;
  return static_cast<int>(it - beam_vocab_.begin());
}

void FeatureEncoder::encode(const MeasurementRow& row, double* out) const {
  int i = 0;
  if (include_crnti_) out[i++] = static_cast<double>(row.crnti);
  for (std::int32_t b : beam_vocab_) out[i++] = (row.current_beam == b) ? 1.0 : 0.0;
  for (std::int32_t b : beam_vocab_) out[i++] = (row.previous_beam == b) ? 1.0 : 0.0;
  out[i++] = row.beam_rsrp_dbm;
  out[i++] = row.beam_sinr_db;
  for (int d = 0; d < 4; ++d) out[i++] = (row.ue_direction == d) ? 1.0 : 0.0;
  out[i++] = row.ue_speed_mps;
  if (include_coords_) {
    out[i++] = row.ue_x_m;
    out[i++] = row.ue_y_m;
  }
  out[i++] = row.rlf ? 1.0 : 0.0;
}

Eigen::RowVectorXd FeatureEncoder::encode(const MeasurementRow& row) const {
  Eigen::RowVectorXd v(width());
  encode(row, v.data());
  return v;
}

void Scaler::fit(const Eigen::MatrixXd& data, long train_rows) {
  if (train_rows <= 0) throw InvalidInput("scaler fit needs a non-empty training range");
  mins_.assign(data.cols(), 0.0);
  maxs_.assign(data.cols(), 0.0);
  for (int c = 0; c < data.cols(); ++c) {
    mins_[c] = data.col(c).head(train_rows).minCoeff();
    maxs_[c] = data.col(c).head(train_rows).maxCoeff();
  }
}

void Scaler::apply(Eigen::MatrixXd& data) const {
  if (data.cols() != width()) throw InvalidInput("scaler width mismatch");
  for (int c = 0; c < data.cols(); ++c) {
    double range = maxs_[c] - mins_[c];
    if (range == 0.0) {
      data.col(c).setZero();  // constant column, by decision
    } else {
      data.col(c) = (data.col(c).array() - mins_[c]) / range;
    }
  }
}

void Scaler::apply_row(Eigen::RowVectorXd& row) const {
  if (row.cols() != width()) throw InvalidInput("scaler width mismatch");
  for (int c = 0; c < row.cols(); ++c) {
    double range = maxs_[c] - mins_[c];
    row(c) = (range == 0.0) ? 0.0 : (row(c) - mins_[c]) / range;
  }
}

Eigen::MatrixXd shift_lag(const Eigen::MatrixXd& data, int k, int l) {
  if (k < 0 || l < 0) throw InvalidInput("lag and lead must be non-negative");
  long m = data.rows();
  if (k + l >= m) throw InvalidInput("insufficient rows for the requested shifts");
  long n = data.cols();
  Eigen::MatrixXd out(m - k - l, n * (k + l + 1));
  for (int s = -k; s <= l; ++s) {
    long block = (s + k) * n;
    out.middleCols(block, n) = data.middleRows(k + s, m - k - l);
  }
  return out;
}

Eigen::MatrixXd difference(const Eigen::MatrixXd& shifted, int k, int l, int n_base) {
  long blocks = k + l + 1;
  if (shifted.cols() != blocks * n_base) throw InvalidInput("shifted matrix width mismatch");
  Eigen::MatrixXd out(shifted.rows(), 2 * blocks * n_base);
  out.leftCols(blocks * n_base) = shifted;
  Eigen::MatrixXd current = shifted.middleCols(k * static_cast<long>(n_base), n_base);
  for (int s = -k; s <= l; ++s) {
    long src = (s + k) * static_cast<long>(n_base);
    long dst = blocks * n_base + src;
    if (s < 0) {
      out.middleCols(dst, n_base) = current - shifted.middleCols(src, n_base);
    } else if (s > 0) {
      out.middleCols(dst, n_base) = shifted.middleCols(src, n_base) - current;
    } else {
      out.middleCols(dst, n_base).setZero();
    }
  }
  return out;
}

long split_index(long m_prime, double r_training, int slots_per_frame) {
  if (m_prime <= 0) throw InvalidInput("empty frame");
  if (r_training <= 0.0 || r_training > 1.0) throw InvalidInput("training fraction out of (0,1]");
  if (slots_per_frame < 1) throw InvalidInput("slots per frame must be >= 1");
  long t = static_cast<long>(std::floor(r_training * static_cast<double>(m_prime)));
  t = (t / slots_per_frame) * slots_per_frame;
  if (t == 0) throw InvalidInput("training split is empty");
  return t;
}

SupervisedFrame make_supervised(const std::vector<MeasurementRow>& rows,
                                const PipelineConfig& cfg, FittedPipeline* fitted_out) {
  return make_supervised_pooled({rows}, cfg, fitted_out);
}

SupervisedFrame make_supervised_pooled(const std::vector<std::vector<MeasurementRow>>& seqs,
                                       const PipelineConfig& cfg, FittedPipeline* fitted_out) {
  const int k = cfg.lookback;
  const int l = cfg.lead;
  const int L = cfg.lookahead;
  if (k < 0 || l < 0) throw InvalidInput("lag and lead must be non-negative");
  if (L < 1) throw InvalidInput("lookahead must be >= 1");

  struct WindowRef {
    int seq;
    long t;  // index of the window's latest row within its sequence
    long end_frame;
  };
  std::vector<WindowRef> windows;
  for (int s = 0; s < static_cast<int>(seqs.size()); ++s) {
    const auto& rows = seqs[s];
    for (long i = 1; i < static_cast<long>(rows.size()); ++i) {
      if (rows[i].frame <= rows[i - 1].frame)
        throw InvalidInput("rows must be strictly increasing in time per sequence");
    }
    for (long t = k; t + std::max(l, L) < static_cast<long>(rows.size()); ++t) {
      windows.push_back({s, t, rows[t].frame});
    }
  }
  if (windows.empty()) throw InvalidInput("insufficient rows for supervised assembly");
  std::stable_sort(windows.begin(), windows.end(),
                   [](const WindowRef& a, const WindowRef& b) { return a.end_frame < b.end_frame; });

  const long m_prime = static_cast<long>(windows.size());
  long t_star = 0;
  if (cfg.split_at_frame >= 0) {
    // Frame-pinned split: training windows are exactly those whose label row
    // precedes the pivot frame (kept first, end-frame order preserved).
    auto before_pivot = [&](const WindowRef& w) {
      return seqs[w.seq][w.t + L].frame < cfg.split_at_frame;
    };
    auto mid = std::stable_partition(windows.begin(), windows.end(), before_pivot);
    t_star = static_cast<long>(mid - windows.begin());
    if (t_star == 0) throw InvalidInput("training split is empty");
  } else {
    t_star = split_index(m_prime, cfg.r_training, cfg.slots_per_frame);
  }

  // Beam vocabulary from rows visible to training windows and labels only.
  std::set<std::int32_t> vocab;
  for (long w = 0; w < t_star; ++w) {
    const auto& rows = seqs[windows[w].seq];
    for (long i = windows[w].t - k; i <= windows[w].t; ++i) {
      vocab.insert(rows[i].current_beam);
      vocab.insert(rows[i].previous_beam);
    }
    vocab.insert(rows[windows[w].t + L].current_beam);
  }
  FeatureEncoder encoder(std::vector<std::int32_t>(vocab.begin(), vocab.end()), cfg.include_crnti,
                         cfg.include_coords);
  const int n_base = encoder.width();

  std::vector<Eigen::MatrixXd> base(seqs.size());
  for (int s = 0; s < static_cast<int>(seqs.size()); ++s) {
    base[s].resize(static_cast<long>(seqs[s].size()), n_base);
    for (long i = 0; i < base[s].rows(); ++i) base[s].row(i) = encoder.encode(seqs[s][i]);
  }

  SupervisedFrame sf;
  sf.steps = k + 1;
  sf.features_per_step = 2 * n_base;
  sf.train_rows = t_star;
  sf.X.resize(m_prime, static_cast<long>(sf.steps) * sf.features_per_step);
  sf.labels.reserve(m_prime);
  sf.label_beams.reserve(m_prime);
  sf.window_end_frame.reserve(m_prime);
  sf.window_seq.reserve(m_prime);

  for (long w = 0; w < m_prime; ++w) {
    const WindowRef& ref = windows[w];
    const Eigen::MatrixXd& b = base[ref.seq];
    long t = ref.t;
    for (int s = 0; s <= k; ++s) {
      long col = static_cast<long>(s) * sf.features_per_step;
      sf.X.row(w).segment(col, n_base) = b.row(t - k + s);
      if (s == k) {
        sf.X.row(w).segment(col + n_base, n_base).setZero();
      } else {
        sf.X.row(w).segment(col + n_base, n_base) = b.row(t) - b.row(t - k + s);
      }
    }
    std::int32_t label_beam = seqs[ref.seq][t + L].current_beam;
    sf.label_beams.push_back(label_beam);
    sf.labels.push_back(encoder.class_of(label_beam));
    sf.window_end_frame.push_back(ref.end_frame);
    sf.window_seq.push_back(ref.seq);
  }

  Scaler scaler;
  scaler.fit(sf.X, t_star);
  scaler.apply(sf.X);

  sf.num_classes = static_cast<int>(encoder.beam_vocab().size());
  sf.class_to_beam.assign(encoder.beam_vocab().begin(), encoder.beam_vocab().end());
  for (int s = 0; s <= k; ++s) {
    std::string at = "@t" + std::string(s == k ? "" : "-" + std::to_string(k - s));
    for (const std::string& nm : encoder.names()) sf.column_catalog.push_back(nm + at);
    for (const std::string& nm : encoder.names()) sf.column_catalog.push_back("d_" + nm + at);
  }

  if (fitted_out) {
    fitted_out->cfg = cfg;
    fitted_out->encoder = encoder;
    fitted_out->scaler = scaler;
  }
  return sf;
}

Eigen::RowVectorXd FittedPipeline::encode_window(const std::vector<MeasurementRow>& window) const {
  const int k = cfg.lookback;
  if (static_cast<int>(window.size()) != k + 1)
    throw InvalidInput("window must contain exactly lookback+1 rows");
  const int n_base = encoder.width();
  Eigen::RowVectorXd current = encoder.encode(window.back());
  Eigen::RowVectorXd out(static_cast<long>(k + 1) * 2 * n_base);
  for (int s = 0; s <= k; ++s) {
    Eigen::RowVectorXd v = encoder.encode(window[s]);
    long col = static_cast<long>(s) * 2 * n_base;
    out.segment(col, n_base) = v;
    if (s == k) {
      out.segment(col + n_base, n_base).setZero();
    } else {
      out.segment(col + n_base, n_base) = current - v;
    }
  }
  scaler.apply_row(out);
  return out;
}

}  // namespace bhsim
