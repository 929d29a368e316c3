#pragma once

#include <string>
#include <vector>

#include "bhsim/radio.hpp"

namespace bhsim {

// Fixed, versioned column order for dataset exports.
inline const char* kDatasetHeader =
    "frame,crnti,current_beam,previous_beam,beam_rsrp_dbm,beam_sinr_db,"
    "ue_direction,ue_speed_mps,ue_x_m,ue_y_m,rlf";

void export_dataset(const std::vector<MeasurementRow>& rows, const std::string& path);
std::vector<MeasurementRow> import_dataset(const std::string& path);

// Deterministic float formatting shared by every artifact writer so that
// identical runs produce byte-identical files.
std::string format_double(double v);

}  // namespace bhsim
