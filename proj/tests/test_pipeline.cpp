#include <doctest.h>

#include <cmath>

#include "bhsim/pipeline.hpp"
#include "bhsim/rng.hpp"

using namespace bhsim;

namespace {

std::vector<MeasurementRow> random_rows(int count, std::uint64_t seed, int beam_span = 8) {
  rng::Stream stream(seed);
  std::vector<MeasurementRow> rows;
  for (int f = 0; f < count; ++f) {
    MeasurementRow r;
    r.frame = f;
    r.crnti = 3;
    r.current_beam = static_cast<std::int32_t>(stream.below(beam_span));
    r.previous_beam = static_cast<std::int32_t>(stream.below(beam_span));
    r.beam_rsrp_dbm = stream.uniform(-120.0, -60.0);
    r.beam_sinr_db = stream.uniform(-10.0, 30.0);
    r.ue_direction = static_cast<int>(stream.below(4));
    r.ue_speed_mps = stream.uniform(22.0, 33.0);
    r.ue_x_m = stream.uniform(0.0, 400.0);
    r.ue_y_m = stream.uniform(0.0, 200.0);
    r.rlf = stream.uniform() < 0.05;
    rows.push_back(r);
  }
  return rows;
}

std::vector<MeasurementRow> beam_sequence(const std::vector<std::int32_t>& beams) {
  std::vector<MeasurementRow> rows;
  for (std::size_t i = 0; i < beams.size(); ++i) {
    MeasurementRow r;
    r.frame = static_cast<long>(i);
    r.current_beam = beams[i];
    r.previous_beam = i ? beams[i - 1] : beams[0];
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_CASE("block-wise time shift hand examples") {
  Eigen::MatrixXd data(5, 1);
  data << 1, 2, 3, 4, 5;
  Eigen::MatrixXd out = shift_lag(data, 1, 1);
  REQUIRE(out.rows() == 3);
  REQUIRE(out.cols() == 3);
  Eigen::MatrixXd want(3, 3);
  want << 1, 2, 3, 2, 3, 4, 3, 4, 5;
  CHECK((out - want).cwiseAbs().maxCoeff() == 0.0);

  // k=0, l=0 is the identity.
  Eigen::MatrixXd same = shift_lag(data, 0, 0);
  CHECK((same - data).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(shift_lag(data, 3, 2), InvalidInput);
  CHECK_THROWS_AS(shift_lag(data, -1, 0), InvalidInput);
}

TEST_CASE("time shift equals an index-arithmetic oracle on random frames") {
  rng::Stream stream(17);
  Eigen::MatrixXd data(200, 4);
  for (long r = 0; r < 200; ++r)
    for (long c = 0; c < 4; ++c) data(r, c) = stream.uniform(-5.0, 5.0);
  for (int k : {0, 1, 3}) {
    for (int l : {0, 2}) {
      Eigen::MatrixXd out = shift_lag(data, k, l);
      REQUIRE(out.rows() == 200 - k - l);
      REQUIRE(out.cols() == 4 * (k + l + 1));
      for (long r = 0; r < out.rows(); ++r)
        for (int b = 0; b <= k + l; ++b)
          for (long c = 0; c < 4; ++c) CHECK(out(r, b * 4 + c) == data(r + b, c));
    }
  }
}

TEST_CASE("difference blocks") {
  Eigen::MatrixXd data(4, 1);
  data << 1, 3, 6, 10;
  Eigen::MatrixXd shifted = shift_lag(data, 1, 0);
  Eigen::MatrixXd out = difference(shifted, 1, 0, 1);
  REQUIRE(out.cols() == 4);  // 2 * (1 + 0 + 1) per base feature
  // Lag difference column carries the first-order differences.
  CHECK(out(0, 2) == doctest::Approx(2.0));
  CHECK(out(1, 2) == doctest::Approx(3.0));
  CHECK(out(2, 2) == doctest::Approx(4.0));
  // Current-time block contributes the zero column.
  CHECK(out.col(3).cwiseAbs().maxCoeff() == 0.0);
  // Left half repeats the shifted values.
  CHECK((out.leftCols(2) - shifted).cwiseAbs().maxCoeff() == 0.0);

  // Constant series: all difference columns are zero.
  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(6, 1, 7.0);
  Eigen::MatrixXd fd = difference(shift_lag(flat, 2, 0), 2, 0, 1);
  CHECK(fd.rightCols(3).cwiseAbs().maxCoeff() == 0.0);

  // Width algebra: lead 7, lag 1 gives 2*(7+1+1) = 18 columns per feature.
  Eigen::MatrixXd longer(20, 1);
  for (int i = 0; i < 20; ++i) longer(i, 0) = i * i;
  CHECK(difference(shift_lag(longer, 1, 7), 1, 7, 1).cols() == 18);

  CHECK_THROWS_AS(difference(shifted, 2, 0, 1), InvalidInput);
}

TEST_CASE("min-max scaler") {
  Eigen::MatrixXd col(3, 1);
  col << 0, 5, 10;
  Scaler s;
  s.fit(col, 3);
  Eigen::MatrixXd scaled = col;
  s.apply(scaled);
  CHECK(scaled(0, 0) == doctest::Approx(0.0));
  CHECK(scaled(1, 0) == doctest::Approx(0.5));
  CHECK(scaled(2, 0) == doctest::Approx(1.0));

  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(3, 1, 7.0);
  Scaler sc;
  sc.fit(flat, 3);
  Eigen::MatrixXd fs = flat;
  sc.apply(fs);
  CHECK(fs.cwiseAbs().maxCoeff() == 0.0);

  // Validation values extrapolate without clamping, and the fit never sees
  // rows past the training pivot.
  Eigen::MatrixXd mixed(3, 1);
  mixed << 0, 10, 12;
  Scaler sv;
  sv.fit(mixed, 2);
  CHECK(sv.col_max(0) == doctest::Approx(10.0));
  Eigen::MatrixXd ms = mixed;
  sv.apply(ms);
  CHECK(ms(2, 0) == doctest::Approx(1.2));

  CHECK_THROWS_AS(sv.fit(mixed, 0), InvalidInput);
}

TEST_CASE("frame-aligned split pivot") {
  CHECK(split_index(5000, 0.6, 10) == 3000);
  CHECK(split_index(1003, 0.6, 10) == 600);
  CHECK(split_index(100, 1.0, 10) == 100);
  for (long m : {17L, 101L, 999L}) CHECK(split_index(m, 0.6, 10) % 10 == 0);
  CHECK_THROWS_AS(split_index(5, 0.1, 10), InvalidInput);
  CHECK_THROWS_AS(split_index(0, 0.6, 10), InvalidInput);
  CHECK_THROWS_AS(split_index(100, 0.0, 10), InvalidInput);
  CHECK_THROWS_AS(split_index(100, 1.1, 10), InvalidInput);
}

TEST_CASE("labels align one step ahead") {
  auto rows = beam_sequence({5, 5, 9, 9});
  PipelineConfig cfg;
  cfg.lookback = 0;
  cfg.slots_per_frame = 1;
  SupervisedFrame sf = make_supervised(rows, cfg);
  REQUIRE(sf.rows() == 3);
  CHECK(sf.label_beams == std::vector<std::int32_t>{5, 9, 9});
}

TEST_CASE("a lookback-2 window spans three consecutive rows") {
  auto rows = random_rows(40, 5);
  PipelineConfig cfg;
  cfg.lookback = 2;
  cfg.slots_per_frame = 1;
  FittedPipeline fitted;
  SupervisedFrame sf = make_supervised(rows, cfg, &fitted);
  CHECK(sf.steps == 3);
  for (long w = 0; w < sf.rows(); ++w) {
    long t = sf.window_end_frame[w];
    std::vector<MeasurementRow> window = {rows[t - 2], rows[t - 1], rows[t]};
    Eigen::RowVectorXd row = fitted.encode_window(window);
    CHECK((row - sf.X.row(w)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("supervised assembly matches a straight-line reimplementation") {
  auto rows = random_rows(100, 9);
  PipelineConfig cfg;
  cfg.lookback = 2;
  cfg.lookahead = 1;
  cfg.slots_per_frame = 10;
  SupervisedFrame sf = make_supervised(rows, cfg);

  const int k = cfg.lookback;
  const long m = static_cast<long>(rows.size());
  const long m_prime = m - k - 1;  // windows with a defined one-ahead label
  REQUIRE(sf.rows() == m_prime);
  long t_star = split_index(m_prime, cfg.r_training, cfg.slots_per_frame);
  REQUIRE(sf.train_rows == t_star);

  // Vocabulary: beams visible to training windows and their labels.
  std::vector<std::int32_t> vocab;
  for (long w = 0; w < t_star; ++w) {
    long t = k + w;
    for (long i = t - k; i <= t; ++i) {
      vocab.push_back(rows[i].current_beam);
      vocab.push_back(rows[i].previous_beam);
    }
    vocab.push_back(rows[t + 1].current_beam);
  }
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  REQUIRE(sf.class_to_beam == std::vector<int>(vocab.begin(), vocab.end()));

  // Base encoding identical to the production encoder's documented layout.
  auto encode = [&](const MeasurementRow& r) {
    std::vector<double> v;
    v.push_back(r.crnti);
    for (std::int32_t b : vocab) v.push_back(r.current_beam == b ? 1.0 : 0.0);
    for (std::int32_t b : vocab) v.push_back(r.previous_beam == b ? 1.0 : 0.0);
    v.push_back(r.beam_rsrp_dbm);
    v.push_back(r.beam_sinr_db);
    for (int d = 0; d < 4; ++d) v.push_back(r.ue_direction == d ? 1.0 : 0.0);
    v.push_back(r.ue_speed_mps);
    v.push_back(r.ue_x_m);
    v.push_back(r.ue_y_m);
    v.push_back(r.rlf ? 1.0 : 0.0);
    return v;
  };
  const int n_base = static_cast<int>(encode(rows[0]).size());
  REQUIRE(sf.features_per_step == 2 * n_base);

  // Unscaled design matrix: [value | current-minus-value] per step.
  Eigen::MatrixXd raw(m_prime, static_cast<long>(k + 1) * 2 * n_base);
  std::vector<int> labels;
  for (long w = 0; w < m_prime; ++w) {
    long t = k + w;
    auto cur = encode(rows[t]);
    for (int s = 0; s <= k; ++s) {
      auto v = encode(rows[t - k + s]);
      for (int c = 0; c < n_base; ++c) {
        raw(w, static_cast<long>(s) * 2 * n_base + c) = v[c];
        raw(w, static_cast<long>(s) * 2 * n_base + n_base + c) = (s == k) ? 0.0 : cur[c] - v[c];
      }
    }
    auto it = std::lower_bound(vocab.begin(), vocab.end(), rows[t + 1].current_beam);
    labels.push_back((it != vocab.end() && *it == rows[t + 1].current_beam)
                         ? static_cast<int>(it - vocab.begin())
                         : -1);
  }
  CHECK(sf.labels == labels);

  // Min-max scaling fitted strictly on the training rows.
  for (long c = 0; c < raw.cols(); ++c) {
    double lo = raw.col(c).head(t_star).minCoeff();
    double hi = raw.col(c).head(t_star).maxCoeff();
    if (hi == lo) raw.col(c).setZero();
    else raw.col(c) = (raw.col(c).array() - lo) / (hi - lo);
  }
  CHECK((raw - sf.X).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identical inputs produce bit-identical frames") {
  auto rows = random_rows(120, 31);
  PipelineConfig cfg;
  cfg.lookback = 3;
  SupervisedFrame a = make_supervised(rows, cfg);
  SupervisedFrame b = make_supervised(rows, cfg);
  CHECK((a.X - b.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.labels == b.labels);
  CHECK(a.column_catalog == b.column_catalog);
}

TEST_CASE("feature toggles control the learner input catalog") {
  auto rows = random_rows(60, 12);
  PipelineConfig with;
  with.lookback = 1;
  PipelineConfig without = with;
  without.include_crnti = false;
  without.include_coords = false;
  SupervisedFrame a = make_supervised(rows, with);
  SupervisedFrame b = make_supervised(rows, without);
  auto has = [](const std::vector<std::string>& cat, const char* name) {
    for (const std::string& c : cat)
      if (c.rfind(name, 0) == 0) return true;
    return false;
  };
  CHECK(has(a.column_catalog, "crnti"));
  CHECK(has(a.column_catalog, "x_m"));
  CHECK_FALSE(has(b.column_catalog, "crnti"));
  CHECK_FALSE(has(b.column_catalog, "x_m"));
  CHECK_FALSE(has(b.column_catalog, "y_m"));
  // The absolute frame index is never a learner input in either mode.
  CHECK_FALSE(has(a.column_catalog, "frame"));
  CHECK_FALSE(has(b.column_catalog, "frame"));
}

TEST_CASE("pooled sequences share one vocabulary and split on a pinned frame") {
  auto seq_a = random_rows(50, 41);
  auto seq_b = random_rows(50, 42);
  for (auto& r : seq_b) r.frame += 3;  // interleaved but strictly increasing per sequence
  PipelineConfig cfg;
  cfg.lookback = 1;
  cfg.split_at_frame = 30;
  SupervisedFrame sf = make_supervised_pooled({seq_a, seq_b}, cfg);
  // Window end frames are merged in nondecreasing order within each split.
  long boundary = sf.train_rows;
  REQUIRE(boundary > 0);
  REQUIRE(boundary < sf.rows());
  for (long w = 1; w < boundary; ++w)
    CHECK(sf.window_end_frame[w] >= sf.window_end_frame[w - 1]);
  for (long w = boundary + 1; w < sf.rows(); ++w)
    CHECK(sf.window_end_frame[w] >= sf.window_end_frame[w - 1]);
  // No window crosses a sequence boundary: every window references one sequence.
  for (long w = 0; w < sf.rows(); ++w) CHECK((sf.window_seq[w] == 0 || sf.window_seq[w] == 1));

  // Non-monotone rows are rejected.
  auto bad = seq_a;
  bad[5].frame = bad[4].frame;
  CHECK_THROWS_AS(make_supervised_pooled({bad}, cfg), InvalidInput);
}
