#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "bhsim/beam_codec.hpp"
#include "bhsim/grid.hpp"
#include "bhsim/mobility.hpp"

namespace bhsim {

struct RadioConfig {
  double carrier_ghz = 4.0;
  double bs_power_dbm = 44.0;          // total per BS, split equally over beams
  int beams_per_bs = 8;
  int num_antennas = 8;                // M
  std::vector<double> beam_azimuths_deg = {44, 56, 69, 82, 96, 109, 122, 134};
  double pl0_db = 44.5;                // path loss at the 1 m reference distance
  double los_exponent = 2.1;
  double nlos_exponent = 3.2;
  double shadow_sigma_los_db = 4.0;
  double shadow_sigma_nlos_db = 8.0;
  double shadow_decorrelation_m = 10.0;  // redraw shadowing every 10 m of travel
  double shadow_sigma_beam_db = 0.0;     // beam-resolved multipath shadowing; 0 disables
  double beam_shadow_cell_m = 10.0;      // spatial grain of the per-beam offsets
  double smallscale_sigma_db = 1.0;      // per-frame perturbation; 0 disables
  double gmax_db = 15.0;                 // beam pattern peak gain
  double beamwidth_3db_deg = 13.0;
  double pattern_floor_db = 25.0;        // pattern clipped at gmax - floor
  double noise_dbm = -94.0;              // thermal + noise figure over the carrier
  double ue_height_m = 1.5;
  double los_axis_tolerance_m = 0.5;

  void validate() const {
    if (beams_per_bs <= 0 || num_antennas <= 0) throw ConfigError("beam/antenna counts must be positive");
    if (static_cast<int>(beam_azimuths_deg.size()) != beams_per_bs)
      throw ConfigError("azimuth list size must equal beams_per_bs");
    if (beamwidth_3db_deg <= 0.0) throw ConfigError("beamwidth must be positive");
  }

  double tx_per_beam_dbm() const {
    return bs_power_dbm - 10.0 * std::log10(static_cast<double>(beams_per_bs));
  }
  double noise_mw() const { return std::pow(10.0, noise_dbm / 10.0); }
};

struct Beam {
  int local_index = 0;
  double azimuth_deg = 0.0;
  Eigen::VectorXcd weight;     // unit-norm beamforming vector
  double beamwidth_rad = 0.0;
};

struct BeamCodebook {
  int bs_id = 0;
  int num_antennas = 0;
  std::vector<Beam> beams;
};

struct ChannelRealization {
  Eigen::VectorXcd h;
  bool los = false;
  double shadow_db = 0.0;
  double pathloss_db = 0.0;
};

struct RadioSample {
  double rsrp_dbm = 0.0;
  double sinr_db = 0.0;
  GlobalBeamId beam{};
  double noise_var = 0.0;
};

// One Table-I-shaped dataset row. `current_beam` is the measured power-optimal
// beam at this frame (what the UE reports), independent of the serving choice.
struct MeasurementRow {
  long frame = 0;
  std::uint32_t crnti = 0;
  std::int32_t current_beam = -1;
  std::int32_t previous_beam = -1;
  double beam_rsrp_dbm = 0.0;
  double beam_sinr_db = 0.0;
  int ue_direction = 0;
  double ue_speed_mps = 0.0;
  double ue_x_m = 0.0;
  double ue_y_m = 0.0;
  bool rlf = false;
};

// Half-wavelength ULA steering vector at the given azimuth (degrees).
Eigen::VectorXcd steering_vector(int num_antennas, double azimuth_deg);

BeamCodebook make_codebook(int bs_id, const RadioConfig& cfg);

// Eq.-style codebook argmax of |h^H f|^2; ties go to the lowest local index.
std::pair<GlobalBeamId, double> best_beam(const ChannelRealization& ch, const BeamCodebook& cb,
                                          const BeamCodec& codec);

// gamma = serving / (sum interferers + noise variance), all linear.
double sinr_linear(double serving_power, const std::vector<double>& interferer_powers,
                   double noise_var);

// Beam coherence time t = D / (v sin a) * Theta / 2, capped at `cap_s` for
// degenerate geometry (sin a -> 0) or when the formula exceeds the cap.
double coherence_time(double distance_m, double speed_mps, double alpha_rad, double beamwidth_rad,
                      double cap_s);

class RadioModel {
 public:
  RadioModel(const StreetGrid& grid, const RadioConfig& cfg, std::uint64_t master_seed);

  const BeamCodec& codec() const { return codec_; }
  const RadioConfig& config() const { return cfg_; }
  const std::vector<BeamCodebook>& codebooks() const { return codebooks_; }

  // Geometry helpers (minimum-image on the torus).
  double horizontal_distance(const UeState& ue, const BsSite& bs) const;
  double link_distance(const UeState& ue, const BsSite& bs) const;
  double azimuth_to_ue_deg(const UeState& ue, const BsSite& bs) const;
  bool is_los(const UeState& ue, const BsSite& bs) const;

  double pathloss_db(double distance_m, bool los) const;
  double shadow_db(const UeState& ue, int bs_id, bool los) const;
  double pattern_gain_db(double delta_az_deg) const;

  ChannelRealization channel(const UeState& ue, const BsSite& bs) const;

  // RSRP of every beam in the network, indexed by global beam id value.
  std::vector<double> rsrp_table(const UeState& ue, long frame) const;

  GlobalBeamId optimal_beam(const std::vector<double>& rsrp_dbm) const;
  double sinr_db(const std::vector<double>& rsrp_dbm, GlobalBeamId serving) const;

  MeasurementRow measure(const UeState& ue, long frame, const std::vector<double>& rsrp_dbm,
                         GlobalBeamId previous_optimal, bool rlf) const;

 private:
  const StreetGrid* grid_;
  RadioConfig cfg_;
  BeamCodec codec_;
  std::vector<BeamCodebook> codebooks_;
  std::uint64_t seed_;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace bhsim
