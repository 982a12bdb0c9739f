#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "heis/cc.hpp"
#include "heis/grid.hpp"
#include "heis/point.hpp"

namespace heis {

/// Midpoint-rule quadrature support: the grid cells whose centers lie in a
/// metric ball, each weighted by the cell volume (Haar = Lebesgue measure).
struct CellSet {
  std::vector<Point> centers;
  double weight = 0.0;  // per-cell volume

  double measure() const { return weight * static_cast<double>(centers.size()); }
};

inline CellSet cells_in_ball(const Grid& grid, const Ball& ball) {
  CellSet cs;
  cs.weight = grid.cell_volume();
  const std::size_t nc = grid.cell_count();
  cs.centers.reserve(nc / 4);
  for (std::size_t c = 0; c < nc; ++c) {
    const Point p = grid.cell_center(c);
    if (ball_dist(ball.metric, ball.center, p) < ball.radius) cs.centers.push_back(p);
  }
  if (cs.centers.empty())
    throw std::domain_error("cells_in_ball: ball does not contain any cell center");
  return cs;
}

inline double lp_norm(const CellSet& cells, const std::function<double(const Point&)>& magnitude,
                      double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: need p >= 1");
  double acc = 0.0;
  for (const auto& c : cells.centers) acc += std::pow(std::fabs(magnitude(c)), p) * cells.weight;
  return std::pow(acc, 1.0 / p);
}

inline double sup_norm(const CellSet& cells, const std::function<double(const Point&)>& magnitude) {
  double s = 0.0;
  for (const auto& c : cells.centers) s = std::max(s, std::fabs(magnitude(c)));
  return s;
}

inline double lp_norm(const Grid& grid, const Ball& ball,
                      const std::function<double(const Point&)>& magnitude, double p) {
  return lp_norm(cells_in_ball(grid, ball), magnitude, p);
}

inline double sup_norm(const Grid& grid, const Ball& ball,
                       const std::function<double(const Point&)>& magnitude) {
  return sup_norm(cells_in_ball(grid, ball), magnitude);
}

}  // namespace heis
