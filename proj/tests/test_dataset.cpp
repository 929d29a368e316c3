#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bhsim/dataset_io.hpp"
#include "bhsim/pipeline.hpp"
#include "bhsim/rng.hpp"

using namespace bhsim;

namespace {

std::vector<MeasurementRow> synthetic_rows(int frames, int ues, std::uint64_t seed) {
  rng::Stream stream(seed);
  std::vector<MeasurementRow> rows;
  for (int f = 0; f < frames; ++f) {
    for (int u = 0; u < ues; ++u) {
      MeasurementRow r;
      r.frame = f;
      r.crnti = static_cast<std::uint32_t>(u);
      r.current_beam = static_cast<std::int32_t>(stream.below(32));
      r.previous_beam = static_cast<std::int32_t>(stream.below(32));
      r.beam_rsrp_dbm = stream.uniform(-120.0, -60.0);
      r.beam_sinr_db = stream.uniform(-10.0, 30.0);
      r.ue_direction = static_cast<int>(stream.below(4));
      r.ue_speed_mps = stream.uniform(22.0, 33.0);
      r.ue_x_m = stream.uniform(0.0, 400.0);
      r.ue_y_m = stream.uniform(0.0, 200.0);
      r.rlf = stream.uniform() < 0.1;
      rows.push_back(r);
    }
  }
  return rows;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/bhsim_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("export writes one header plus one line per row") {
  TempFile tmp("count.csv");
  auto rows = synthetic_rows(10, 2, 1);
  export_dataset(rows, tmp.path);
  std::ifstream in(tmp.path);
  std::string line;
  int count = 0;
  std::getline(in, line);
  CHECK(line == kDatasetHeader);
  while (std::getline(in, line))
    if (!line.empty()) ++count;
  CHECK(count == 20);
}

TEST_CASE("rlf column encodes as 0 or 1 only") {
  TempFile tmp("rlf.csv");
  auto rows = synthetic_rows(20, 1, 2);
  export_dataset(rows, tmp.path);
  std::ifstream in(tmp.path);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    auto pos = line.rfind(',');
    std::string rlf = line.substr(pos + 1);
    CHECK((rlf == "0" || rlf == "1"));
  }
}

TEST_CASE("roundtrip reproduces rows exactly") {
  TempFile tmp("roundtrip.csv");
  auto rows = synthetic_rows(50, 3, 3);
  export_dataset(rows, tmp.path);
  auto back = import_dataset(tmp.path);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].frame == rows[i].frame);
    CHECK(back[i].crnti == rows[i].crnti);
    CHECK(back[i].current_beam == rows[i].current_beam);
    CHECK(back[i].previous_beam == rows[i].previous_beam);
    CHECK(back[i].beam_rsrp_dbm == rows[i].beam_rsrp_dbm);  // bit-exact
    CHECK(back[i].beam_sinr_db == rows[i].beam_sinr_db);
    CHECK(back[i].ue_direction == rows[i].ue_direction);
    CHECK(back[i].ue_speed_mps == rows[i].ue_speed_mps);
    CHECK(back[i].ue_x_m == rows[i].ue_x_m);
    CHECK(back[i].ue_y_m == rows[i].ue_y_m);
    CHECK(back[i].rlf == rows[i].rlf);
  }
}

TEST_CASE("reimported rows build an identical supervised frame") {
  TempFile tmp("supervised.csv");
  auto rows = synthetic_rows(80, 1, 4);
  export_dataset(rows, tmp.path);
  auto back = import_dataset(tmp.path);
  PipelineConfig cfg;
  cfg.lookback = 2;
  SupervisedFrame a = make_supervised(rows, cfg);
  SupervisedFrame b = make_supervised(back, cfg);
  REQUIRE(a.rows() == b.rows());
  CHECK(a.labels == b.labels);
  CHECK(a.label_beams == b.label_beams);
  CHECK(a.train_rows == b.train_rows);
  CHECK((a.X - b.X).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("malformed input is rejected") {
  TempFile tmp("bad.csv");
  {
    std::ofstream out(tmp.path);
    out << "frame,crnti,wrong_header\n1,2,3\n";
  }
  CHECK_THROWS_AS(import_dataset(tmp.path), IoError);
  {
    std::ofstream out(tmp.path);
    out << kDatasetHeader << "\n1,2,3\n";  // too few fields
  }
  CHECK_THROWS_AS(import_dataset(tmp.path), IoError);
  CHECK_THROWS_AS(import_dataset("/tmp/bhsim_does_not_exist.csv"), IoError);
}

TEST_CASE("shared float formatting is deterministic and lossless") {
  double values[] = {0.1, -117.25, 3.0, 1e-17, 27.778};
  for (double v : values) {
    std::string s = format_double(v);
    CHECK(std::stod(s) == v);
    CHECK(format_double(v) == s);
  }
}
