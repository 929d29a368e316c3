#include "bhsim/config.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace bhsim {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& v) {
  std::size_t pos = 0;
  double d = std::stod(v, &pos);
  if (pos != v.size()) throw ConfigError("bad numeric value: " + v);
  return d;
}

long parse_long(const std::string& v) {
  std::size_t pos = 0;
  long n = std::stol(v, &pos);
  if (pos != v.size()) throw ConfigError("bad integer value: " + v);
  return n;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("bad boolean value: " + v);
}

std::vector<int> parse_int_list(const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<int>(parse_long(item)));
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  engine.validate();
  if (lookbacks.empty()) throw ConfigError("at least one lookback is required");
  for (int lb : lookbacks)
    if (lb < 0 || lb > 10) throw ConfigError("lookback out of range [0,10]: " + std::to_string(lb));
  if (output_dir.empty()) throw ConfigError("output directory must be set");
}

ExperimentConfig desk_preset() {
  // Small-footprint configuration tuned so that the qualitative effects show
  // up within ~500 frames on a laptop: a dense 2x2 micro-cell torus with short
  // blocks (trajectories revisit locations quickly), commuter-style fixed
  // routes, frozen large-scale shadowing, and strong per-UE beam-level
  // shadowing so every UE carries a distinctive, learnable beam map.
  ExperimentConfig cfg;
  cfg.preset_name = "desk";
  cfg.engine.grid.blocks_x = 2;
  cfg.engine.grid.blocks_y = 2;
  cfg.engine.grid.block_width_m = 5.0;
  cfg.engine.grid.block_height_m = 5.0;
  cfg.engine.num_ues = 16;
  cfg.engine.frames = 500;
  cfg.engine.mobility.habitual_routes = true;
  cfg.engine.mobility.speed_resample_prob = 0.0;
  cfg.engine.radio.smallscale_sigma_db = 0.0;
  cfg.engine.radio.shadow_decorrelation_m = 1e6;  // effectively frozen
  cfg.engine.radio.shadow_sigma_beam_db = 14.0;
  cfg.engine.radio.beam_shadow_cell_m = 5.0;
  cfg.engine.model_dropout = 0.05;
  cfg.engine.training.epochs = 192;
  cfg.engine.training.batch_size = 16;
  cfg.engine.training.adam.learning_rate = 0.004;
  cfg.engine.min_train_windows = 150;
  cfg.lookbacks = {0, 2, 4, 7, 8};
  return cfg;
}

ExperimentConfig paper_preset() {
  ExperimentConfig cfg;
  cfg.preset_name = "paper";
  cfg.engine.grid.blocks_x = 8;
  cfg.engine.grid.blocks_y = 4;
  cfg.engine.num_ues = 400;
  cfg.engine.frames = 5000;
  cfg.engine.training.epochs = 192;
  cfg.engine.training.batch_size = 64;
  cfg.engine.min_train_windows = 60;
  cfg.lookbacks = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  return cfg;
}

ExperimentConfig preset_by_name(const std::string& name) {
  if (name == "desk") return desk_preset();
  if (name == "paper") return paper_preset();
  throw ConfigError("unknown preset: " + name);
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& section, const std::string& key,
                        const std::string& value) {
  using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"grid.block_width_m", [](auto& c, auto& v) { c.engine.grid.block_width_m = parse_double(v); }},
      {"grid.block_height_m", [](auto& c, auto& v) { c.engine.grid.block_height_m = parse_double(v); }},
      {"grid.blocks_x", [](auto& c, auto& v) { c.engine.grid.blocks_x = static_cast<int>(parse_long(v)); }},
      {"grid.blocks_y", [](auto& c, auto& v) { c.engine.grid.blocks_y = static_cast<int>(parse_long(v)); }},
      {"grid.bs_antenna_height_m", [](auto& c, auto& v) { c.engine.grid.bs_antenna_height_m = parse_double(v); }},

      {"mobility.mean_speed_kmh", [](auto& c, auto& v) { c.engine.mobility.mean_speed_kmh = parse_double(v); }},
      {"mobility.speed_spread_kmh", [](auto& c, auto& v) { c.engine.mobility.speed_spread_kmh = parse_double(v); }},
      {"mobility.speed_event_interval_m", [](auto& c, auto& v) { c.engine.mobility.speed_event_interval_m = parse_double(v); }},
      {"mobility.speed_resample_prob", [](auto& c, auto& v) { c.engine.mobility.speed_resample_prob = parse_double(v); }},
      {"mobility.frame_duration_s", [](auto& c, auto& v) { c.engine.mobility.frame_duration_s = parse_double(v); }},
      {"mobility.habitual_routes", [](auto& c, auto& v) { c.engine.mobility.habitual_routes = parse_bool(v); }},

      {"radio.carrier_ghz", [](auto& c, auto& v) { c.engine.radio.carrier_ghz = parse_double(v); }},
      {"radio.bs_power_dbm", [](auto& c, auto& v) { c.engine.radio.bs_power_dbm = parse_double(v); }},
      {"radio.pl0_db", [](auto& c, auto& v) { c.engine.radio.pl0_db = parse_double(v); }},
      {"radio.los_exponent", [](auto& c, auto& v) { c.engine.radio.los_exponent = parse_double(v); }},
      {"radio.nlos_exponent", [](auto& c, auto& v) { c.engine.radio.nlos_exponent = parse_double(v); }},
      {"radio.shadow_sigma_los_db", [](auto& c, auto& v) { c.engine.radio.shadow_sigma_los_db = parse_double(v); }},
      {"radio.shadow_sigma_nlos_db", [](auto& c, auto& v) { c.engine.radio.shadow_sigma_nlos_db = parse_double(v); }},
      {"radio.shadow_decorrelation_m", [](auto& c, auto& v) { c.engine.radio.shadow_decorrelation_m = parse_double(v); }},
      {"radio.shadow_sigma_beam_db", [](auto& c, auto& v) { c.engine.radio.shadow_sigma_beam_db = parse_double(v); }},
      {"radio.beam_shadow_cell_m", [](auto& c, auto& v) { c.engine.radio.beam_shadow_cell_m = parse_double(v); }},
      {"radio.smallscale_sigma_db", [](auto& c, auto& v) { c.engine.radio.smallscale_sigma_db = parse_double(v); }},
      {"radio.gmax_db", [](auto& c, auto& v) { c.engine.radio.gmax_db = parse_double(v); }},
      {"radio.beamwidth_3db_deg", [](auto& c, auto& v) { c.engine.radio.beamwidth_3db_deg = parse_double(v); }},
      {"radio.pattern_floor_db", [](auto& c, auto& v) { c.engine.radio.pattern_floor_db = parse_double(v); }},
      {"radio.noise_dbm", [](auto& c, auto& v) { c.engine.radio.noise_dbm = parse_double(v); }},

      {"legacy.a3_offset_db", [](auto& c, auto& v) { c.engine.legacy.a3_offset_db = parse_double(v); }},
      {"legacy.time_to_trigger_ms", [](auto& c, auto& v) { c.engine.legacy.time_to_trigger_ms = parse_double(v); }},
      {"legacy.rrc_report_interval_ms", [](auto& c, auto& v) { c.engine.legacy.rrc_report_interval_ms = parse_double(v); }},
      {"legacy.llm_report_interval_ms", [](auto& c, auto& v) { c.engine.legacy.llm_report_interval_ms = parse_double(v); }},

      {"learner.width", [](auto& c, auto& v) { c.engine.model_width = static_cast<int>(parse_long(v)); }},
      {"learner.dense_layers", [](auto& c, auto& v) { c.engine.model_dense_layers = static_cast<int>(parse_long(v)); }},
      {"learner.dropout", [](auto& c, auto& v) { c.engine.model_dropout = parse_double(v); }},
      {"learner.min_train_windows", [](auto& c, auto& v) { c.engine.min_train_windows = parse_long(v); }},
      {"learner.validation_accuracy_gate", [](auto& c, auto& v) { c.engine.validation_accuracy_gate = parse_double(v); }},

      {"training.epochs", [](auto& c, auto& v) { c.engine.training.epochs = static_cast<int>(parse_long(v)); }},
      {"training.batch_size", [](auto& c, auto& v) { c.engine.training.batch_size = static_cast<int>(parse_long(v)); }},
      {"training.learning_rate", [](auto& c, auto& v) { c.engine.training.adam.learning_rate = parse_double(v); }},

      {"run.seed", [](auto& c, auto& v) { c.engine.seed = static_cast<std::uint64_t>(parse_long(v)); }},
      {"run.num_ues", [](auto& c, auto& v) { c.engine.num_ues = static_cast<int>(parse_long(v)); }},
      {"run.frames", [](auto& c, auto& v) { c.engine.frames = parse_long(v); }},
      {"run.slots_per_frame", [](auto& c, auto& v) { c.engine.slots_per_frame = static_cast<int>(parse_long(v)); }},
      {"run.r_training", [](auto& c, auto& v) { c.engine.r_training = parse_double(v); }},
      {"run.undegraded_threshold_db", [](auto& c, auto& v) { c.engine.undegraded_threshold_db = parse_double(v); }},
      {"run.rlf_threshold_dbm", [](auto& c, auto& v) { c.engine.rlf_threshold_dbm = parse_double(v); }},
      {"run.rlf_consecutive_frames", [](auto& c, auto& v) { c.engine.rlf_consecutive_frames = static_cast<int>(parse_long(v)); }},
      {"run.recovery_frames_intra", [](auto& c, auto& v) { c.engine.recovery_frames_intra = static_cast<int>(parse_long(v)); }},
      {"run.recovery_frames_inter", [](auto& c, auto& v) { c.engine.recovery_frames_inter = static_cast<int>(parse_long(v)); }},
      {"run.retrain_interval_frames", [](auto& c, auto& v) { c.engine.retrain_interval_frames = parse_long(v); }},
      {"run.transfer_epoch_fraction", [](auto& c, auto& v) { c.engine.transfer_epoch_fraction = parse_double(v); }},
      {"run.mode", [](auto& c, auto& v) { c.mode = mode_from_string(v); }},
      {"run.lookbacks", [](auto& c, auto& v) { c.lookbacks = parse_int_list(v); }},
      {"run.output_dir", [](auto& c, auto& v) { c.output_dir = v; }},
  };

  auto it = setters.find(section + "." + key);
  if (it == setters.end())
    throw ConfigError("unknown configuration key: [" + section + "] " + key);
  try {
    it->second(cfg, value);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("bad value for [" + section + "] " + key + ": " + value);
  }
}

void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::string line, section;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t cut = line.find_first_of("#;");
    if (cut != std::string::npos) line = line.substr(0, cut);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": key outside any section");
    apply_config_entry(cfg, section, key, value);
  }
}

std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "[grid]\n"
      << "block_width_m = " << cfg.engine.grid.block_width_m << "\n"
      << "block_height_m = " << cfg.engine.grid.block_height_m << "\n"
      << "blocks_x = " << cfg.engine.grid.blocks_x << "\n"
      << "blocks_y = " << cfg.engine.grid.blocks_y << "\n"
      << "bs_antenna_height_m = " << cfg.engine.grid.bs_antenna_height_m << "\n\n";
  out << "[mobility]\n"
      << "mean_speed_kmh = " << cfg.engine.mobility.mean_speed_kmh << "\n"
      << "speed_spread_kmh = " << cfg.engine.mobility.speed_spread_kmh << "\n"
      << "speed_event_interval_m = " << cfg.engine.mobility.speed_event_interval_m << "\n"
      << "speed_resample_prob = " << cfg.engine.mobility.speed_resample_prob << "\n"
      << "frame_duration_s = " << cfg.engine.mobility.frame_duration_s << "\n"
      << "habitual_routes = " << (cfg.engine.mobility.habitual_routes ? "true" : "false") << "\n\n";
  out << "[radio]\n"
      << "carrier_ghz = " << cfg.engine.radio.carrier_ghz << "\n"
      << "bs_power_dbm = " << cfg.engine.radio.bs_power_dbm << "\n"
      << "pl0_db = " << cfg.engine.radio.pl0_db << "\n"
      << "los_exponent = " << cfg.engine.radio.los_exponent << "\n"
      << "nlos_exponent = " << cfg.engine.radio.nlos_exponent << "\n"
      << "shadow_sigma_los_db = " << cfg.engine.radio.shadow_sigma_los_db << "\n"
      << "shadow_sigma_nlos_db = " << cfg.engine.radio.shadow_sigma_nlos_db << "\n"
      << "shadow_decorrelation_m = " << cfg.engine.radio.shadow_decorrelation_m << "\n"
      << "shadow_sigma_beam_db = " << cfg.engine.radio.shadow_sigma_beam_db << "\n"
      << "beam_shadow_cell_m = " << cfg.engine.radio.beam_shadow_cell_m << "\n"
      << "smallscale_sigma_db = " << cfg.engine.radio.smallscale_sigma_db << "\n"
      << "gmax_db = " << cfg.engine.radio.gmax_db << "\n"
      << "beamwidth_3db_deg = " << cfg.engine.radio.beamwidth_3db_deg << "\n"
      << "pattern_floor_db = " << cfg.engine.radio.pattern_floor_db << "\n"
      << "noise_dbm = " << cfg.engine.radio.noise_dbm << "\n\n";
  out << "[legacy]\n"
      << "a3_offset_db = " << cfg.engine.legacy.a3_offset_db << "\n"
      << "time_to_trigger_ms = " << cfg.engine.legacy.time_to_trigger_ms << "\n"
      << "rrc_report_interval_ms = " << cfg.engine.legacy.rrc_report_interval_ms << "\n"
      << "llm_report_interval_ms = " << cfg.engine.legacy.llm_report_interval_ms << "\n\n";
  out << "[learner]\n"
      << "width = " << cfg.engine.model_width << "\n"
      << "dense_layers = " << cfg.engine.model_dense_layers << "\n"
      << "dropout = " << cfg.engine.model_dropout << "\n"
      << "min_train_windows = " << cfg.engine.min_train_windows << "\n"
      << "validation_accuracy_gate = " << cfg.engine.validation_accuracy_gate << "\n\n";
  out << "[training]\n"
      << "epochs = " << cfg.engine.training.epochs << "\n"
      << "batch_size = " << cfg.engine.training.batch_size << "\n"
      << "learning_rate = " << cfg.engine.training.adam.learning_rate << "\n\n";
  out << "[run]\n"
      << "seed = " << cfg.engine.seed << "\n"
      << "num_ues = " << cfg.engine.num_ues << "\n"
      << "frames = " << cfg.engine.frames << "\n"
      << "slots_per_frame = " << cfg.engine.slots_per_frame << "\n"
      << "r_training = " << cfg.engine.r_training << "\n"
      << "undegraded_threshold_db = " << cfg.engine.undegraded_threshold_db << "\n"
      << "rlf_threshold_dbm = " << cfg.engine.rlf_threshold_dbm << "\n"
      << "rlf_consecutive_frames = " << cfg.engine.rlf_consecutive_frames << "\n"
      << "recovery_frames_intra = " << cfg.engine.recovery_frames_intra << "\n"
      << "recovery_frames_inter = " << cfg.engine.recovery_frames_inter << "\n"
      << "retrain_interval_frames = " << cfg.engine.retrain_interval_frames << "\n"
      << "transfer_epoch_fraction = " << cfg.engine.transfer_epoch_fraction << "\n"
      << "mode = " << to_string(cfg.mode) << "\n"
      << "lookbacks = ";
  for (std::size_t i = 0; i < cfg.lookbacks.size(); ++i)
    out << (i ? "," : "") << cfg.lookbacks[i];
  out << "\n"
      << "output_dir = " << cfg.output_dir << "\n";
  return out.str();
}

}  // namespace bhsim
