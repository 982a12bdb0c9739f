#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

namespace heis {

using Complex = std::complex<double>;

/// Element (x, y, t) of the first Heisenberg group.
///
/// Group law: (x,y,t) * (x',y',t') = (x+x', y+y', t+t' - 2xy' + 2x'y).
/// In complex notation z = x + iy the vertical increment is -2 Im(conj(z) z').
struct Point {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;

  Complex z() const { return {x, y}; }
};

inline Point make_point(Complex z, double t) { return {z.real(), z.imag(), t}; }

inline Point mul(const Point& p, const Point& q) {
  return {p.x + q.x, p.y + q.y, p.t + q.t - 2.0 * p.x * q.y + 2.0 * q.x * p.y};
}

inline Point inv(const Point& p) { return {-p.x, -p.y, -p.t}; }

inline Point identity_point() { return {0.0, 0.0, 0.0}; }

/// Homogeneous dilation delta_r(x,y,t) = (rx, ry, r^2 t); a group automorphism.
inline Point dilate(double r, const Point& p) {
  if (!(r > 0.0)) throw std::invalid_argument("dilate: scale must be positive");
  return {r * p.x, r * p.y, r * r * p.t};
}

/// Koranyi gauge ((x^2+y^2)^2 + t^2)^(1/4).
inline double koranyi_norm(const Point& p) {
  const double zz = p.x * p.x + p.y * p.y;
  return std::pow(zz * zz + p.t * p.t, 0.25);
}

inline double koranyi_dist(const Point& a, const Point& b) {
  return koranyi_norm(mul(inv(a), b));
}

/// Pseudometric d^H: planar Euclidean distance of the (x, y) projections.
inline double dh_dist(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Horizontal tangent vector, coordinates in the left-invariant frame {X, Y}.
struct HVector {
  double a = 0.0;
  double b = 0.0;

  double norm() const { return std::hypot(a, b); }
};

enum class Metric { CC, Koranyi };

/// Metric ball; CC balls are the default domain of every sup/integral here.
struct Ball {
  Point center;
  double radius = 1.0;
  Metric metric = Metric::CC;
};

}  // namespace heis
