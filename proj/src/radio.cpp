#include "bhsim/radio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bhsim {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kShadowTag = 0x5badf00dULL;
constexpr std::uint64_t kSmallScaleTag = 0xd0bb1e44ULL;
constexpr std::uint64_t kBeamShadowTag = 0xbea35badULL;
}  // namespace

Eigen::VectorXcd steering_vector(int num_antennas, double azimuth_deg) {
  Eigen::VectorXcd a(num_antennas);
  double c = std::cos(azimuth_deg * kPi / 180.0);
  for (int m = 0; m < num_antennas; ++m) {
    double phase = kPi * m * c;
    a(m) = std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return a;
}

BeamCodebook make_codebook(int bs_id, const RadioConfig& cfg) {
  cfg.validate();
  BeamCodebook cb;
  cb.bs_id = bs_id;
  cb.num_antennas = cfg.num_antennas;
  cb.beams.reserve(cfg.beams_per_bs);
  double theta = cfg.beamwidth_3db_deg * kPi / 180.0;
  for (int b = 0; b < cfg.beams_per_bs; ++b) {
    Beam beam;
    beam.local_index = b;
    beam.azimuth_deg = cfg.beam_azimuths_deg[b];
    beam.weight = steering_vector(cfg.num_antennas, beam.azimuth_deg) /
                  std::sqrt(static_cast<double>(cfg.num_antennas));
    beam.beamwidth_rad = theta;
    cb.beams.push_back(std::move(beam));
  }
  return cb;
}

std::pair<GlobalBeamId, double> best_beam(const ChannelRealization& ch, const BeamCodebook& cb,
                                          const BeamCodec& codec) {
  if (cb.beams.empty()) throw InvalidInput("empty codebook");
  int best = 0;
  double best_gain = -1.0;
  for (const Beam& beam : cb.beams) {
    double gain = std::norm((ch.h.adjoint() * beam.weight)(0, 0));  // |h^H f|^2
    if (gain > best_gain) {
      best_gain = gain;
      best = beam.local_index;
    }
  }
  return {codec.encode(cb.bs_id, best), best_gain};
}

double sinr_linear(double serving_power, const std::vector<double>& interferer_powers,
                   double noise_var) {
  if (noise_var <= 0.0) throw ConfigError("noise variance must be positive");
  if (serving_power < 0.0) throw InvalidInput("negative serving power");
  double denom = noise_var;
  for (double p : interferer_powers) {
    if (p < 0.0) throw InvalidInput("negative interferer power");
    denom += p;
  }
  return serving_power / denom;
}

double coherence_time(double distance_m, double speed_mps, double alpha_rad, double beamwidth_rad,
                      double cap_s) {
  if (speed_mps <= 0.0) throw InvalidInput("speed must be positive for coherence time");
  if (beamwidth_rad <= 0.0) throw InvalidInput("beamwidth must be positive");
  if (distance_m <= 0.0) return 0.0;
  double s = std::sin(alpha_rad);
  if (s <= 1e-9) return cap_s;
  double t = distance_m / (speed_mps * s) * beamwidth_rad / 2.0;
  return std::min(t, cap_s);
}

RadioModel::RadioModel(const StreetGrid& grid, const RadioConfig& cfg, std::uint64_t master_seed)
    : grid_(&grid), cfg_(cfg), codec_(grid.num_bs(), cfg.beams_per_bs), seed_(master_seed) {
  cfg_.validate();
  codebooks_.reserve(grid.num_bs());
  for (const BsSite& site : grid.sites()) {
    codebooks_.push_back(make_codebook(site.bs_id, cfg_));
  }
}

double RadioModel::horizontal_distance(const UeState& ue, const BsSite& bs) const {
  return grid_->distance(ue.x, ue.y, bs.x, bs.y);
}

double RadioModel::link_distance(const UeState& ue, const BsSite& bs) const {
  double d2 = horizontal_distance(ue, bs);
  double dh = bs.antenna_height_m - cfg_.ue_height_m;
  return std::hypot(d2, dh);
}

double RadioModel::azimuth_to_ue_deg(const UeState& ue, const BsSite& bs) const {
  double dx, dy;
  grid_->displacement(bs.x, bs.y, ue.x, ue.y, dx, dy);
  if (std::hypot(dx, dy) <= 1e-9) throw InvalidInput("UE coincides with BS site");
  double az = std::atan2(dy, dx) * 180.0 / kPi;
  if (az < 0.0) az += 360.0;
  return az;
}

bool RadioModel::is_los(const UeState& ue, const BsSite& bs) const {
  // Street-canyon rule: LOS iff UE and BS sit on the same street line.
  double dx, dy;
  grid_->displacement(ue.x, ue.y, bs.x, bs.y, dx, dy);
  return std::abs(dx) <= cfg_.los_axis_tolerance_m || std::abs(dy) <= cfg_.los_axis_tolerance_m;
}

double RadioModel::pathloss_db(double distance_m, bool los) const {
  double d = std::max(distance_m, 1.0);
  double n = los ? cfg_.los_exponent : cfg_.nlos_exponent;
  return cfg_.pl0_db + 10.0 * n * std::log10(d);
}

double RadioModel::shadow_db(const UeState& ue, int bs_id, bool los) const {
  double sigma = los ? cfg_.shadow_sigma_los_db : cfg_.shadow_sigma_nlos_db;
  if (sigma <= 0.0) return 0.0;
  auto segment = static_cast<std::uint64_t>(ue.odometer_m / cfg_.shadow_decorrelation_m);
  return sigma * rng::keyed_gaussian(seed_, kShadowTag, ue.crnti,
                                     static_cast<std::uint64_t>(bs_id), segment);
}

double RadioModel::pattern_gain_db(double delta_az_deg) const {
  double d = std::fmod(std::abs(delta_az_deg), 360.0);
  if (d > 180.0) d = 360.0 - d;
  double loss = 12.0 * (d / cfg_.beamwidth_3db_deg) * (d / cfg_.beamwidth_3db_deg);
  return cfg_.gmax_db - std::min(loss, cfg_.pattern_floor_db);
}

ChannelRealization RadioModel::channel(const UeState& ue, const BsSite& bs) const {
  double d2 = horizontal_distance(ue, bs);
  if (d2 <= 1e-9) throw InvalidInput("singular geometry: UE at BS position");
  ChannelRealization ch;
  ch.los = is_los(ue, bs);
  ch.pathloss_db = pathloss_db(link_distance(ue, bs), ch.los);
  ch.shadow_db = shadow_db(ue, bs.bs_id, ch.los);
  double amp = std::pow(10.0, -(ch.pathloss_db + ch.shadow_db) / 20.0);
  ch.h = amp * steering_vector(cfg_.num_antennas, azimuth_to_ue_deg(ue, bs));
  return ch;
}

std::vector<double> RadioModel::rsrp_table(const UeState& ue, long frame) const {
  std::vector<double> table(static_cast<std::size_t>(codec_.num_beams()),
                            -std::numeric_limits<double>::infinity());
  for (const BsSite& bs : grid_->sites()) {
    double d2 = horizontal_distance(ue, bs);
    double az = (d2 <= 1e-9) ? 0.0 : azimuth_to_ue_deg(ue, bs);
    bool los = is_los(ue, bs);
    double pl = pathloss_db(link_distance(ue, bs), los);
    double sh = shadow_db(ue, bs.bs_id, los);
    for (const Beam& beam : codebooks_[bs.bs_id].beams) {
      double rsrp = cfg_.tx_per_beam_dbm() + pattern_gain_db(az - beam.azimuth_deg) - pl - sh;
      std::uint64_t beam_tag =
          static_cast<std::uint64_t>(codec_.encode(bs.bs_id, beam.local_index).value);
      if (cfg_.shadow_sigma_beam_db > 0.0) {
        // Beam-resolved multipath shadowing: each UE carries its own frozen
        // spatial map of per-beam offsets, constant within square cells of
        // beam_shadow_cell_m so revisited locations reproduce the same offset.
        auto cx = static_cast<std::uint64_t>(ue.x / cfg_.beam_shadow_cell_m);
        auto cy = static_cast<std::uint64_t>(ue.y / cfg_.beam_shadow_cell_m);
        rsrp += cfg_.shadow_sigma_beam_db *
                rng::keyed_gaussian(seed_, kBeamShadowTag, ue.crnti, beam_tag,
                                    (cx << 32) | cy);
      }
      if (cfg_.smallscale_sigma_db > 0.0) {
        rsrp += cfg_.smallscale_sigma_db *
                rng::keyed_gaussian(seed_, kSmallScaleTag, ue.crnti, beam_tag,
                                    static_cast<std::uint64_t>(frame));
      }
      table[static_cast<std::size_t>(codec_.encode(bs.bs_id, beam.local_index).value)] = rsrp;
    }
  }
  return table;
}

GlobalBeamId RadioModel::optimal_beam(const std::vector<double>& rsrp_dbm) const {
  int best = 0;
  for (int i = 1; i < static_cast<int>(rsrp_dbm.size()); ++i) {
    if (rsrp_dbm[i] > rsrp_dbm[best]) best = i;  // ties keep the lowest id
  }
  return GlobalBeamId{best};
}

double RadioModel::sinr_db(const std::vector<double>& rsrp_dbm, GlobalBeamId serving) const {
  // Full buffer: every non-serving beam of every BS interferes.
  double serving_mw = 0.0;
  double interference_mw = 0.0;
  for (int i = 0; i < static_cast<int>(rsrp_dbm.size()); ++i) {
    double p = dbm_to_mw(rsrp_dbm[i]);
    if (i == serving.value) {
      serving_mw = p;
    } else {
      interference_mw += p;
    }
  }
  return lin_to_db(serving_mw / (interference_mw + cfg_.noise_mw()));
}

MeasurementRow RadioModel::measure(const UeState& ue, long frame,
                                   const std::vector<double>& rsrp_dbm,
                                   GlobalBeamId previous_optimal, bool rlf) const {
  GlobalBeamId opt = optimal_beam(rsrp_dbm);
  MeasurementRow row;
  row.frame = frame;
  row.crnti = ue.crnti;
  row.current_beam = opt.value;
  row.previous_beam = previous_optimal.valid() ? previous_optimal.value : opt.value;
  row.beam_rsrp_dbm = rsrp_dbm[static_cast<std::size_t>(opt.value)];
  row.beam_sinr_db = sinr_db(rsrp_dbm, opt);
  row.ue_direction = static_cast<int>(ue.direction);
  row.ue_speed_mps = ue.speed_mps;
  row.ue_x_m = ue.x;
  row.ue_y_m = ue.y;
  row.rlf = rlf;
  return row;
}

}  // namespace bhsim
