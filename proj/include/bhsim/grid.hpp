#pragma once

#include <vector>

#include "bhsim/errors.hpp"

namespace bhsim {

struct GridConfig {
  double block_width_m = 200.0;
  double block_height_m = 100.0;
  int blocks_x = 8;
  int blocks_y = 4;
  double bs_antenna_height_m = 5.0;

  void validate() const {
    if (block_width_m <= 0.0 || block_height_m <= 0.0)
      throw ConfigError("block dimensions must be positive");
    if (blocks_x < 1 || blocks_y < 1)
      throw ConfigError("grid needs at least one intersection in each axis");
    if (bs_antenna_height_m <= 0.0)
      throw ConfigError("antenna height must be positive");
  }
};

struct BsSite {
  int bs_id = 0;
  double x = 0.0;
  double y = 0.0;
  double antenna_height_m = 0.0;
};

// Manhattan street grid on a torus. Vertical streets at x = i*block_width for
// i in [0, blocks_x), horizontal streets at y = j*block_height; one BS per
// intersection, ids dense in row-major order. UEs leaving one edge re-enter on
// the opposite edge so trajectories run continuously for the whole episode.
class StreetGrid {
 public:
  static StreetGrid build(const GridConfig& cfg);

  const GridConfig& config() const { return cfg_; }
  const std::vector<BsSite>& sites() const { return sites_; }
  int num_bs() const { return static_cast<int>(sites_.size()); }

  double width() const { return cfg_.blocks_x * cfg_.block_width_m; }
  double height() const { return cfg_.blocks_y * cfg_.block_height_m; }

  // Wraps a coordinate pair into the fundamental domain.
  void wrap(double& x, double& y) const;

  // Minimum-image displacement from (x0,y0) to (x1,y1).
  void displacement(double x0, double y0, double x1, double y1, double& dx, double& dy) const;
  double distance(double x0, double y0, double x1, double y1) const;

  bool on_vertical_street(double x, double eps = 1e-6) const;
  bool on_horizontal_street(double y, double eps = 1e-6) const;
  bool on_street(double x, double y, double eps = 1e-6) const;

  // Snaps a coordinate to the nearest street line of the given orientation.
  double snap_to_vertical(double x) const;
  double snap_to_horizontal(double y) const;

 private:
  GridConfig cfg_;
  std::vector<BsSite> sites_;
};

}  // namespace bhsim
