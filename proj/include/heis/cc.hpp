#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "heis/point.hpp"

namespace heis {

/// Thrown when the arc-angle equation cannot be solved to tolerance.
class CcSolveError : public std::runtime_error {
 public:
  CcSolveError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

namespace detail {

// Geodesics to the origin project to planar circular arcs (Dido problem):
// along a horizontal curve tdot = 2y xdot - 2x ydot, so the vertical
// displacement is -4 times the area swept by the chord from the origin.
// For chord length c and arc angle phi in (0, 2pi) the endpoint satisfies
//   |t| = c^2 * g(phi),   g(phi) = (phi - sin phi) / (1 - cos phi),
// and the arc length is  c * (phi/2) / sin(phi/2).  g is increasing, g(0+) = 0,
// g(2pi-) = +inf, so phi is unique.

inline double dido_g(double phi) {
  if (phi < 1e-2) {
    // series: g = (phi/3)(1 + phi^2/30 + phi^4/840 + ...)
    const double p2 = phi * phi;
    return phi / 3.0 * (1.0 + p2 / 30.0 + p2 * p2 / 840.0);
  }
  if (phi <= std::numbers::pi) return (phi - std::sin(phi)) / (1.0 - std::cos(phi));
  // upper half in u = pi - phi/2 to avoid cancellation near 2pi
  const double u = std::numbers::pi - 0.5 * phi;
  const double su = std::sin(u);
  return (2.0 * std::numbers::pi - 2.0 * u + std::sin(2.0 * u)) / (2.0 * su * su);
}

inline double dido_arc_factor(double phi) {
  // (phi/2) / sin(phi/2), the arc-length / chord ratio
  if (phi < 1e-2) {
    const double p2 = phi * phi;
    return 1.0 + p2 / 24.0 + 7.0 * p2 * p2 / 5760.0;
  }
  if (phi <= std::numbers::pi) return 0.5 * phi / std::sin(0.5 * phi);
  const double u = std::numbers::pi - 0.5 * phi;
  return (std::numbers::pi - u) / std::sin(u);
}

/// Solves g(phi) = y for phi in (0, 2pi) by bisection down to fp resolution.
inline double solve_dido_angle(double y) {
  double lo = 0.0;
  double hi = 2.0 * std::numbers::pi * (1.0 - 1e-13);
  if (dido_g(hi) < y)
    throw CcSolveError("cc_dist: arc-angle bracket exhausted", dido_g(hi) - y);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval at fp resolution
    (dido_g(mid) < y ? lo : hi) = mid;
  }
  const double phi = 0.5 * (lo + hi);
  if (hi - lo > 1e-10 * (1.0 + phi)) {
    throw CcSolveError("cc_dist: arc-angle bisection stalled", dido_g(phi) - y);
  }
  return phi;
}

}  // namespace detail

/// Carnot-Caratheodory distance to the origin.
inline double cc_norm(const Point& p) {
  const double c = std::hypot(p.x, p.y);
  const double tau = std::fabs(p.t);
  if (tau == 0.0) return c;
  const double circle = std::sqrt(std::numbers::pi * tau);
  if (c == 0.0) return circle;
  // endpoint nearly on the vertical axis: full-circle isoperimetric branch
  if (c <= 1e-8 * std::sqrt(tau)) return circle - c;
  const double phi = detail::solve_dido_angle(tau / (c * c));
  return c * detail::dido_arc_factor(phi);
}

/// CC distance; left-invariant, symmetric, delta_r-homogeneous of degree 1.
inline double cc_dist(const Point& a, const Point& b) {
  return cc_norm(mul(inv(a), b));
}

inline double ball_dist(Metric metric, const Point& a, const Point& b) {
  return metric == Metric::CC ? cc_dist(a, b) : koranyi_dist(a, b);
}

inline bool ball_contains(const Ball& ball, const Point& p) {
  return ball_dist(ball.metric, ball.center, p) < ball.radius;
}

namespace detail {

/// Point at arclength fraction v in [0, 1] on a minimizing geodesic from the
/// origin to `target`.  Used by the chain construction; for targets on the
/// vertical axis one of the (rotationally degenerate) geodesics is picked.
inline Point geodesic_from_origin(const Point& target, double v) {
  const Complex z1 = target.z();
  const double c = std::abs(z1);
  const double tau = std::fabs(target.t);
  if (tau == 0.0) return make_point(v * z1, 0.0);

  double sweep;       // signed arc angle
  Complex arc_center; // center of the projected circle
  if (c <= 1e-8 * std::sqrt(tau)) {
    sweep = target.t > 0.0 ? -2.0 * std::numbers::pi : 2.0 * std::numbers::pi;
    arc_center = Complex(std::sqrt(tau / (4.0 * std::numbers::pi)), 0.0);
  } else {
    const double phi = solve_dido_angle(tau / (c * c));
    sweep = target.t > 0.0 ? -phi : phi;
    arc_center = z1 / (1.0 - std::exp(Complex(0.0, sweep)));
  }
  const Complex w = arc_center * (1.0 - std::exp(Complex(0.0, sweep * v)));
  const double r2 = std::norm(arc_center);
  const double t = -2.0 * r2 * (sweep * v - std::sin(sweep * v));
  return make_point(w, t);
}

inline Point geodesic_point(const Point& from, const Point& to, double v) {
  return mul(from, geodesic_from_origin(mul(inv(from), to), v));
}

}  // namespace detail

}  // namespace heis
