#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "heis/point.hpp"

namespace heis {

struct Box {
  std::array<double, 3> lo{-1.0, -1.0, -1.0};
  std::array<double, 3> hi{1.0, 1.0, 1.0};

  double extent(int axis) const { return hi[axis] - lo[axis]; }
  double diameter() const {
    return std::sqrt(extent(0) * extent(0) + extent(1) * extent(1) + extent(2) * extent(2));
  }
  bool contains(const Point& p, double margin = 0.0) const {
    return p.x >= lo[0] - margin && p.x <= hi[0] + margin && p.y >= lo[1] - margin &&
           p.y <= hi[1] + margin && p.t >= lo[2] - margin && p.t <= hi[2] + margin;
  }
  Point center() const {
    return {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])};
  }
  Box scaled(double factor) const {
    const Point c = center();
    Box b;
    b.lo = {c.x - 0.5 * factor * extent(0), c.y - 0.5 * factor * extent(1),
            c.t - 0.5 * factor * extent(2)};
    b.hi = {c.x + 0.5 * factor * extent(0), c.y + 0.5 * factor * extent(1),
            c.t + 0.5 * factor * extent(2)};
    return b;
  }
};

/// Regular node grid on a box; nodes include both box faces, t index fastest.
struct Grid {
  Box box;
  std::array<int, 3> n{9, 9, 9};

  Grid() = default;
  Grid(const Box& b, std::array<int, 3> counts) : box(b), n(counts) {
    for (int a = 0; a < 3; ++a) {
      if (n[a] < 2) throw std::invalid_argument("Grid: need at least 2 nodes per axis");
      if (!(box.hi[a] > box.lo[a])) throw std::invalid_argument("Grid: empty box");
    }
  }

  static Grid cube(const Point& center, double half, int nodes) {
    Box b;
    b.lo = {center.x - half, center.y - half, center.t - half};
    b.hi = {center.x + half, center.y + half, center.t + half};
    return Grid(b, {nodes, nodes, nodes});
  }

  double spacing(int axis) const { return box.extent(axis) / (n[axis] - 1); }

  std::size_t size() const {
    return static_cast<std::size_t>(n[0]) * n[1] * n[2];
  }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n[1] + j) * n[2] + k;
  }

  Point node(int i, int j, int k) const {
    return {box.lo[0] + i * spacing(0), box.lo[1] + j * spacing(1),
            box.lo[2] + k * spacing(2)};
  }

  Point node(std::size_t linear) const {
    const int k = static_cast<int>(linear % n[2]);
    const std::size_t ij = linear / n[2];
    const int j = static_cast<int>(ij % n[1]);
    const int i = static_cast<int>(ij / n[1]);
    return node(i, j, k);
  }

  std::size_t cell_count() const {
    return static_cast<std::size_t>(n[0] - 1) * (n[1] - 1) * (n[2] - 1);
  }

  Point cell_center(std::size_t cell) const {
    const int ck = static_cast<int>(cell % (n[2] - 1));
    const std::size_t ij = cell / (n[2] - 1);
    const int cj = static_cast<int>(ij % (n[1] - 1));
    const int ci = static_cast<int>(ij / (n[1] - 1));
    return {box.lo[0] + (ci + 0.5) * spacing(0), box.lo[1] + (cj + 0.5) * spacing(1),
            box.lo[2] + (ck + 0.5) * spacing(2)};
  }

  double cell_volume() const { return spacing(0) * spacing(1) * spacing(2); }
};

}  // namespace heis
