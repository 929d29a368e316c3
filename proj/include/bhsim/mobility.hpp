#pragma once

#include <cstdint>
#include <vector>

#include "bhsim/beam_codec.hpp"
#include "bhsim/grid.hpp"
#include "bhsim/rng.hpp"

namespace bhsim {

enum class Direction : int { North = 0, East = 1, South = 2, West = 3 };

inline double dir_dx(Direction d) { return d == Direction::East ? 1.0 : d == Direction::West ? -1.0 : 0.0; }
inline double dir_dy(Direction d) { return d == Direction::North ? 1.0 : d == Direction::South ? -1.0 : 0.0; }
inline Direction opposite(Direction d) { return static_cast<Direction>((static_cast<int>(d) + 2) % 4); }
inline bool is_vertical(Direction d) { return d == Direction::North || d == Direction::South; }

struct MobilityConfig {
  double mean_speed_kmh = 100.0;
  double speed_spread_kmh = 20.0;     // resampled uniform on mean +/- spread
  double speed_event_interval_m = 100.0;
  double speed_resample_prob = 0.2;
  double frame_duration_s = 0.01;     // one radio frame
  // When set, each UE follows a fixed personal route: the turn taken at an
  // intersection is a deterministic function of (UE, intersection, incoming
  // direction) instead of a fresh uniform draw, so trajectories settle into
  // repeating commuter-style loops. Default keeps the uniform turning law.
  bool habitual_routes = false;
};

struct UeState {
  std::uint32_t crnti = 0;
  double x = 0.0;
  double y = 0.0;
  Direction direction = Direction::East;
  double speed_mps = 0.0;
  double dist_since_speed_event_m = 0.0;
  double odometer_m = 0.0;            // total travel, drives shadow decorrelation
  GlobalBeamId serving_beam{};
  GlobalBeamId previous_beam{};
  bool llm_paused = false;
};

// Uniform placement on the street graph with directions uniform over the four
// options; the street orientation is chosen to match the drawn direction.
std::vector<UeState> spawn_ues(const StreetGrid& grid, int count, std::uint64_t master_seed);

// Advances one UE by one time step. Turns are drawn only at intersections
// (uniform over the three non-reversing options); every accumulated 100 m the
// speed is resampled with the configured probability.
UeState step_mobility(const UeState& ue, double dt_s, const StreetGrid& grid,
                      const MobilityConfig& cfg, rng::Stream& stream);

// Angle in [0, pi] between the travel direction and the direction toward the
// BS, using minimum-image displacement on the torus.
double heading_angle(const UeState& ue, const BsSite& bs, const StreetGrid& grid);

inline double kmh_to_mps(double kmh) { return kmh / 3.6; }

}  // namespace bhsim
