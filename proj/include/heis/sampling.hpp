#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "heis/cc.hpp"
#include "heis/point.hpp"

namespace heis {

/// Halton low-discrepancy sequence member i (>= 0) in base b.
inline double halton(std::uint64_t i, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  for (std::uint64_t n = i + 1; n > 0; n /= base) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(n % base);
  }
  return r;
}

/// Quasi-uniform points of the closed CC unit ball B(0, 1), deterministic.
/// Candidates come from the Halton sequence on the bounding box
/// [-1,1]^2 x [-1/pi, 1/pi] and are filtered by the CC gauge.
inline std::vector<Point> sample_unit_cc_ball(int n) {
  std::vector<Point> pts;
  pts.reserve(n);
  const double tmax = 1.0 / std::numbers::pi;
  for (std::uint64_t i = 0; static_cast<int>(pts.size()) < n; ++i) {
    Point p{2.0 * halton(i, 2) - 1.0, 2.0 * halton(i, 3) - 1.0,
            tmax * (2.0 * halton(i, 5) - 1.0)};
    if (cc_norm(p) <= 1.0) pts.push_back(p);
    if (i > 64ull * static_cast<std::uint64_t>(n) + 4096ull)
      throw std::runtime_error("sample_unit_cc_ball: rejection stalled");
  }
  return pts;
}

/// Quasi-uniform points of a metric ball, via left translation and dilation
/// of the unit-ball point set (both are isometries/homotheties of the gauge).
inline std::vector<Point> sample_ball(const Ball& ball, int n) {
  std::vector<Point> pts;
  if (ball.metric == Metric::CC) {
    pts = sample_unit_cc_ball(n);
    for (auto& p : pts) p = mul(ball.center, dilate(ball.radius, p));
    return pts;
  }
  pts.reserve(n);
  for (std::uint64_t i = 0; static_cast<int>(pts.size()) < n; ++i) {
    Point p{2.0 * halton(i, 2) - 1.0, 2.0 * halton(i, 3) - 1.0,
            2.0 * halton(i, 5) - 1.0};
    if (koranyi_norm(p) <= 1.0)
      pts.push_back(mul(ball.center, dilate(ball.radius, p)));
    if (i > 64ull * static_cast<std::uint64_t>(n) + 4096ull)
      throw std::runtime_error("sample_ball: rejection stalled");
  }
  return pts;
}

/// Sampled sup of f over a ball: quasi-uniform samples plus a shrinking
/// compass search around the discrete argmax (kept inside the ball).
inline double sup_over_ball(const std::function<double(const Point&)>& f, const Ball& ball,
                            int n_samples = 2048, int refine_rounds = 24) {
  const auto pts = sample_ball(ball, n_samples);
  double best = -std::numeric_limits<double>::infinity();
  Point best_p = ball.center;
  for (const auto& p : pts) {
    const double v = f(p);
    if (v > best) {
      best = v;
      best_p = p;
    }
  }
  const double r = ball.radius;
  double step = 0.25;
  for (int round = 0; round < refine_rounds; ++round) {
    bool improved = false;
    const Point deltas[6] = {{step * r, 0, 0},    {-step * r, 0, 0},
                             {0, step * r, 0},    {0, -step * r, 0},
                             {0, 0, step * step * r * r}, {0, 0, -step * step * r * r}};
    for (const auto& d : deltas) {
      Point q{best_p.x + d.x, best_p.y + d.y, best_p.t + d.t};
      if (ball_dist(ball.metric, ball.center, q) > r) continue;
      const double v = f(q);
      if (v > best) {
        best = v;
        best_p = q;
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

/// Golden-section minimizer on [lo, hi] for a unimodal bracket.
inline double golden_min(const std::function<double(double)>& f, double lo, double hi,
                         int iters, double* arg = nullptr) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < iters; ++it) {
    if (f1 > f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = f(x1);
    }
  }
  if (arg) *arg = f1 < f2 ? x1 : x2;
  return std::min(f1, f2);
}

/// Ordinary least-squares slope of y against x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("ols_slope: need two samples with matching sizes");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols_slope: degenerate abscissae");
  return sxy / sxx;
}

/// Deterministic RNG helpers; raw mt19937_64 draws so values do not depend on
/// the standard library's distribution internals.
struct Rng {
  std::mt19937_64 gen;

  explicit Rng(std::uint64_t seed) : gen(seed) {}

  double uniform() {  // in [0, 1)
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    // Box-Muller on raw uniforms
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool coin() { return (gen() & 1ull) != 0; }

  Point point_in_box(double zmax, double tmax) {
    return {uniform(-zmax, zmax), uniform(-zmax, zmax), uniform(-tmax, tmax)};
  }
};

}  // namespace heis
