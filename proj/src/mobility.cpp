#include "bhsim/mobility.hpp"

#include <algorithm>
#include <cmath>

#include "bhsim/errors.hpp"

namespace bhsim {

namespace {

double draw_speed(const MobilityConfig& cfg, rng::Stream& stream) {
  double lo = cfg.mean_speed_kmh - cfg.speed_spread_kmh;
  double hi = cfg.mean_speed_kmh + cfg.speed_spread_kmh;
  return kmh_to_mps(stream.uniform(lo, hi));
}

// Distance along `dir` from (x, y) to the next intersection, assuming the UE
// sits on a street compatible with `dir`.
double dist_to_next_intersection(const StreetGrid& grid, double x, double y, Direction dir) {
  const GridConfig& c = grid.config();
  double coord = is_vertical(dir) ? y : x;
  double spacing = is_vertical(dir) ? c.block_height_m : c.block_width_m;
  double sign = dir_dx(dir) + dir_dy(dir);  // +1 or -1
  double r = std::fmod(coord, spacing);
  if (r < 0.0) r += spacing;
  double d = (sign > 0.0) ? spacing - r : r;
  if (d <= 1e-9) d = spacing;  // already at a line: next one is a full block away
  return d;
}

Direction pick_non_reversing(Direction incoming, int pick) {
  Direction banned = opposite(incoming);
  for (int d = 0; d < 4; ++d) {
    if (static_cast<Direction>(d) == banned) continue;
    if (pick-- == 0) return static_cast<Direction>(d);
  }
  return incoming;  // unreachable
}

Direction turn_at_intersection(Direction incoming, rng::Stream& stream) {
  // Uniform over the three options that are not an immediate reversal.
  return pick_non_reversing(incoming, static_cast<int>(stream.below(3)));
}

constexpr std::uint64_t kRouteTag = 0x4ab17a11ULL;

Direction habitual_turn(std::uint32_t crnti, const StreetGrid& grid, double x, double y,
                        Direction incoming) {
  // Personal fixed-route turning: the choice is a hash of who is driving,
  // which intersection this is, and where they came from. Re-entering the
  // same intersection the same way always repeats the same turn, so each UE
  // traces a closed loop on the street graph.
  const GridConfig& c = grid.config();
  auto ix = static_cast<std::uint64_t>(std::llround(x / c.block_width_m)) %
            static_cast<std::uint64_t>(c.blocks_x);
  auto iy = static_cast<std::uint64_t>(std::llround(y / c.block_height_m)) %
            static_cast<std::uint64_t>(c.blocks_y);
  std::uint64_t h = rng::mix(rng::mix(rng::mix(kRouteTag, crnti), (ix << 32) | iy),
                             static_cast<std::uint64_t>(incoming));
  return pick_non_reversing(incoming, static_cast<int>(h % 3));
}

}  // namespace

std::vector<UeState> spawn_ues(const StreetGrid& grid, int count, std::uint64_t master_seed) {
  if (count <= 0) throw ConfigError("UE count must be positive");
  const GridConfig& c = grid.config();
  MobilityConfig mob;  // spawn speed law matches the resampling law
  std::vector<UeState> ues;
  ues.reserve(count);
  for (int i = 0; i < count; ++i) {
    rng::Stream stream = rng::substream(master_seed, 0x5eed0001ULL, static_cast<std::uint64_t>(i));
    UeState ue;
    ue.crnti = static_cast<std::uint32_t>(i);
    ue.direction = static_cast<Direction>(stream.below(4));
    if (is_vertical(ue.direction)) {
      int street = static_cast<int>(stream.below(static_cast<std::uint64_t>(c.blocks_x)));
      ue.x = street * c.block_width_m;
      ue.y = stream.uniform(0.0, grid.height());
    } else {
      int street = static_cast<int>(stream.below(static_cast<std::uint64_t>(c.blocks_y)));
      ue.y = street * c.block_height_m;
      ue.x = stream.uniform(0.0, grid.width());
    }
    ue.speed_mps = draw_speed(mob, stream);
    ues.push_back(ue);
  }
  return ues;
}

UeState step_mobility(const UeState& in, double dt_s, const StreetGrid& grid,
                      const MobilityConfig& cfg, rng::Stream& stream) {
  if (dt_s <= 0.0) throw InvalidInput("time step must be positive");
  if (!grid.on_street(in.x, in.y)) throw InvalidInput("UE is off the street graph");
  UeState ue = in;
  double remaining = ue.speed_mps * dt_s;
  double moved = 0.0;
  // A frame normally covers a fraction of a block; the loop handles the rare
  // case of crossing one or more intersections within a single step.
  while (remaining > 0.0) {
    double to_next = dist_to_next_intersection(grid, ue.x, ue.y, ue.direction);
    double hop = std::min(remaining, to_next);
    ue.x += dir_dx(ue.direction) * hop;
    ue.y += dir_dy(ue.direction) * hop;
    grid.wrap(ue.x, ue.y);
    remaining -= hop;
    moved += hop;
    if (hop == to_next) {
      // Landed exactly on an intersection: snap to kill fp drift, then turn.
      ue.x = grid.snap_to_vertical(ue.x);
      ue.y = grid.snap_to_horizontal(ue.y);
      ue.direction = cfg.habitual_routes
                         ? habitual_turn(ue.crnti, grid, ue.x, ue.y, ue.direction)
                         : turn_at_intersection(ue.direction, stream);
    }
  }
  ue.odometer_m += moved;
  ue.dist_since_speed_event_m += moved;
  while (ue.dist_since_speed_event_m >= cfg.speed_event_interval_m) {
    ue.dist_since_speed_event_m -= cfg.speed_event_interval_m;
    if (stream.uniform() < cfg.speed_resample_prob) {
      ue.speed_mps = draw_speed(cfg, stream);
    }
  }
  return ue;
}

double heading_angle(const UeState& ue, const BsSite& bs, const StreetGrid& grid) {
  double dx, dy;
  grid.displacement(ue.x, ue.y, bs.x, bs.y, dx, dy);
  double norm = std::hypot(dx, dy);
  if (norm <= 1e-12) throw InvalidInput("heading angle undefined at zero distance");
  double dot = (dir_dx(ue.direction) * dx + dir_dy(ue.direction) * dy) / norm;
  dot = std::clamp(dot, -1.0, 1.0);
  return std::acos(dot);
}

}  // namespace bhsim
