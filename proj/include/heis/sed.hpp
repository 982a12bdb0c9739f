#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "heis/point.hpp"

namespace heis {

struct Disk {
  Complex center{0.0, 0.0};
  double radius = 0.0;
};

namespace detail {

inline bool disk_covers(const Disk& d, Complex p, double slack) {
  return std::abs(p - d.center) <= d.radius + slack;
}

inline Disk disk_two(Complex a, Complex b) {
  return {0.5 * (a + b), 0.5 * std::abs(a - b)};
}

inline Disk circumdisk(Complex a, Complex b, Complex c) {
  const Complex bb = b - a, cc = c - a;
  const double det = 2.0 * (bb.real() * cc.imag() - bb.imag() * cc.real());
  const double scale = std::max({std::abs(bb), std::abs(cc), std::abs(bb - cc)});
  if (std::fabs(det) <= 1e-14 * scale * scale) {
    // nearly collinear: the minimal disk is the diametral disk of the
    // farthest pair
    Disk d = disk_two(a, b);
    const Disk d2 = disk_two(a, c), d3 = disk_two(b, c);
    if (d2.radius > d.radius) d = d2;
    if (d3.radius > d.radius) d = d3;
    return d;
  }
  const double nb = std::norm(bb), nc = std::norm(cc);
  const Complex u{(cc.imag() * nb - bb.imag() * nc) / det,
                  (bb.real() * nc - cc.real() * nb) / det};
  return {a + u, std::abs(u)};
}

}  // namespace detail

/// Smallest disk covering all points; determined by at most 3 support points.
/// Welzl-style incremental construction on a deterministically shuffled copy,
/// expected linear time.
inline Disk smallest_enclosing_disk(std::vector<Complex> pts) {
  if (pts.empty()) throw std::invalid_argument("smallest_enclosing_disk: empty input");
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, std::abs(p));
  const double slack = 1e-12 * std::max(1.0, scale);

  std::mt19937_64 gen(0x9e3779b97f4a7c15ull);
  std::shuffle(pts.begin(), pts.end(), gen);

  Disk d{pts[0], 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (detail::disk_covers(d, pts[i], slack)) continue;
    d = {pts[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (detail::disk_covers(d, pts[j], slack)) continue;
      d = detail::disk_two(pts[i], pts[j]);
      for (std::size_t k = 0; k < j; ++k) {
        if (detail::disk_covers(d, pts[k], slack)) continue;
        d = detail::circumdisk(pts[i], pts[j], pts[k]);
      }
    }
  }
  return d;
}

}  // namespace heis
