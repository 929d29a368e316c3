#include "bhsim/grid.hpp"

#include <cmath>

namespace bhsim {

StreetGrid StreetGrid::build(const GridConfig& cfg) {
  cfg.validate();
  StreetGrid g;
  g.cfg_ = cfg;
  g.sites_.reserve(static_cast<std::size_t>(cfg.blocks_x) * cfg.blocks_y);
  int id = 0;
  for (int j = 0; j < cfg.blocks_y; ++j) {
    for (int i = 0; i < cfg.blocks_x; ++i) {
      g.sites_.push_back(BsSite{id++, i * cfg.block_width_m, j * cfg.block_height_m,
                                cfg.bs_antenna_height_m});
    }
  }
  return g;
}

namespace {
double wrap_coord(double v, double period) {
  double w = std::fmod(v, period);
  if (w < 0.0) w += period;
  // fmod can return exactly `period` after the negative fixup when v is a
  // tiny negative number.
  if (w >= period) w -= period;
  return w;
}

double min_image(double d, double period) {
  d = std::fmod(d, period);
  if (d > 0.5 * period) d -= period;
  if (d < -0.5 * period) d += period;
  return d;
}

double dist_to_nearest_line(double v, double spacing) {
  double r = std::fmod(v, spacing);
  if (r < 0.0) r += spacing;
  return std::min(r, spacing - r);
}
}  // namespace

void StreetGrid::wrap(double& x, double& y) const {
  x = wrap_coord(x, width());
  y = wrap_coord(y, height());
}

void StreetGrid::displacement(double x0, double y0, double x1, double y1, double& dx,
                              double& dy) const {
  dx = min_image(x1 - x0, width());
  dy = min_image(y1 - y0, height());
}

double StreetGrid::distance(double x0, double y0, double x1, double y1) const {
  double dx, dy;
  displacement(x0, y0, x1, y1, dx, dy);
  return std::hypot(dx, dy);
}

bool StreetGrid::on_vertical_street(double x, double eps) const {
  return dist_to_nearest_line(x, cfg_.block_width_m) <= eps;
}

bool StreetGrid::on_horizontal_street(double y, double eps) const {
  return dist_to_nearest_line(y, cfg_.block_height_m) <= eps;
}

bool StreetGrid::on_street(double x, double y, double eps) const {
  return on_vertical_street(x, eps) || on_horizontal_street(y, eps);
}

double StreetGrid::snap_to_vertical(double x) const {
  double line = std::round(x / cfg_.block_width_m) * cfg_.block_width_m;
  return wrap_coord(line, width());
}

double StreetGrid::snap_to_horizontal(double y) const {
  double line = std::round(y / cfg_.block_height_m) * cfg_.block_height_m;
  return wrap_coord(line, height());
}

}  // namespace bhsim
