#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "heis/cc.hpp"
#include "heis/mat2.hpp"
#include "heis/point.hpp"

namespace heis {

inline double normalize_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

/// Isometry of H^1 in the fixed canonical order "translate o rotate o reflect":
///   x  |->  trans * R_angle( iota^reflect (x) )
/// with iota(z,t) = (conj z, -t) and R_A(z,t) = (e^{iA} z, t).
/// Every isometry of the CC and Koranyi metrics has exactly one such form.
struct Isometry {
  bool reflect = false;
  double angle = 0.0;  // in [0, 2pi)
  Point trans;
};

inline Isometry iso_identity() { return {}; }
inline Isometry iso_translation(const Point& a) { return {false, 0.0, a}; }
inline Isometry iso_rotation(double a) { return {false, normalize_angle(a), {}}; }
inline Isometry iso_reflection() { return {true, 0.0, {}}; }

/// Planar part of the action: z -> trans.z + e^{i angle} * (z or conj z).
inline Complex apply_planar(const Isometry& f, Complex z) {
  if (f.reflect) z = std::conj(z);
  return f.trans.z() + std::polar(1.0, f.angle) * z;
}

inline Point apply(const Isometry& f, const Point& p) {
  Point q = p;
  if (f.reflect) {
    q.y = -q.y;
    q.t = -q.t;
  }
  const Complex w = std::polar(1.0, f.angle) * q.z();
  return mul(f.trans, make_point(w, q.t));
}

/// Composition in canonical form. Uses that iota and R_A are group
/// automorphisms with iota o R_B = R_{-B} o iota and R_A o pi_b = pi_{R_A b} o R_A.
inline Isometry compose(const Isometry& f, const Isometry& g) {
  Isometry r;
  r.reflect = f.reflect != g.reflect;
  r.angle = normalize_angle(f.angle + (f.reflect ? -g.angle : g.angle));
  r.trans = apply(f, g.trans);
  return r;
}

inline Isometry inverse(const Isometry& f) {
  Isometry r;
  r.reflect = f.reflect;
  r.angle = normalize_angle(f.reflect ? f.angle : -f.angle);
  Point a = inv(f.trans);
  if (f.reflect) {
    a.y = -a.y;
    a.t = -a.t;
  }
  const Complex w = std::polar(1.0, r.angle) * a.z();
  r.trans = make_point(w, a.t);
  return r;
}

/// Constant horizontal differential; orthogonal, det = +1 without reflection
/// and -1 with it.
inline Mat2 horizontal_matrix(const Isometry& f) {
  Mat2 m = Mat2::rotation(f.angle);
  if (f.reflect) m = m * Mat2::conjugation();
  return m;
}

/// Sampled sup of d^H(f(x), x) over the CC ball B(center, radius).
///
/// The deviation depends on z only and is a norm of an affine map of z, hence
/// convex: the sup sits on the boundary circle of the projected disc.  Sampled
/// with n angles plus golden-section refinement around the best one.
inline double sup_dh_deviation(const Isometry& f, const Point& center, double radius,
                               int n_samples = 4096) {
  if (!(radius > 0.0)) throw std::invalid_argument("sup_dh_deviation: radius must be positive");
  const Complex zc = center.z();
  auto dev = [&](double theta) {
    const Complex z = zc + std::polar(radius, theta);
    return std::abs(apply_planar(f, z) - z);
  };
  double best = 0.0, best_theta = 0.0;
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < n_samples; ++i) {
    const double theta = two_pi * i / n_samples;
    const double d = dev(theta);
    if (d > best) {
      best = d;
      best_theta = theta;
    }
  }
  // golden-section refinement of the 1-D maximum on the bracketing interval
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = best_theta - two_pi / n_samples;
  double hi = best_theta + two_pi / n_samples;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = dev(x1), f2 = dev(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = dev(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = dev(x1);
    }
  }
  return std::max(best, std::max(f1, f2));
}

struct DeviationScaling {
  double sup_inner = 0.0;    // sampled sup of d^H(f(x), x) over B(a, r)
  double sup_outer = 0.0;    // same over B(a, s r)
  double dh_matrix_dev = 0.0;  // |D_h f - I| in spectral norm
};

/// Measures the three quantities tied by the deviation-scaling inequalities
///   sup_outer <= (2s+1) r eps  and  |D_h f - I| <= 2 eps,  eps = sup_inner / r.
inline DeviationScaling deviation_scaling_check(const Isometry& f, const Point& a,
                                                double r, double s,
                                                int n_samples = 4096) {
  if (!(r > 0.0)) throw std::invalid_argument("deviation_scaling_check: r must be positive");
  if (!(s >= 1.0)) throw std::invalid_argument("deviation_scaling_check: s must be >= 1");
  DeviationScaling out;
  out.sup_inner = sup_dh_deviation(f, a, r, n_samples);
  out.sup_outer = sup_dh_deviation(f, a, s * r, n_samples);
  out.dh_matrix_dev = op_norm(horizontal_matrix(f) - Mat2::identity());
  return out;
}

}  // namespace heis
