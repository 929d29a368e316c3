#include "bhsim/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bhsim/errors.hpp"

namespace bhsim {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void export_dataset(const std::vector<MeasurementRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open dataset file for writing: " + path);
  out << kDatasetHeader << '\n';
  for (const MeasurementRow& r : rows) {
    out << r.frame << ',' << r.crnti << ',' << r.current_beam << ',' << r.previous_beam << ','
        << format_double(r.beam_rsrp_dbm) << ',' << format_double(r.beam_sinr_db) << ','
        << r.ue_direction << ',' << format_double(r.ue_speed_mps) << ','
        << format_double(r.ue_x_m) << ',' << format_double(r.ue_y_m) << ','
        << (r.rlf ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("failed writing dataset file: " + path);
}

std::vector<MeasurementRow> import_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty dataset file: " + path);
  if (line != kDatasetHeader) throw IoError("unexpected dataset header in " + path);
  std::vector<MeasurementRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 11) throw IoError("malformed dataset row: " + line);
    MeasurementRow r;
    r.frame = std::stol(fields[0]);
    r.crnti = static_cast<std::uint32_t>(std::stoul(fields[1]));
    r.current_beam = std::stoi(fields[2]);
    r.previous_beam = std::stoi(fields[3]);
    r.beam_rsrp_dbm = std::stod(fields[4]);
    r.beam_sinr_db = std::stod(fields[5]);
    r.ue_direction = std::stoi(fields[6]);
    r.ue_speed_mps = std::stod(fields[7]);
    r.ue_x_m = std::stod(fields[8]);
    r.ue_y_m = std::stod(fields[9]);
    r.rlf = fields[10] == "1";
    rows.push_back(r);
  }
  return rows;
}

}  // namespace bhsim
