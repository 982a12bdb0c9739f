#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "heis/exec.hpp"
#include "heis/grid.hpp"
#include "heis/isometry.hpp"
#include "heis/mat2.hpp"
#include "heis/point.hpp"

namespace heis {

/// Time-s flow of X = d/dx + 2y d/dt.
inline Point x_flow(const Point& p, double s) { return {p.x + s, p.y, p.t + 2.0 * p.y * s}; }

/// Time-s flow of Y = d/dy - 2x d/dt.
inline Point y_flow(const Point& p, double s) { return {p.x, p.y + s, p.t - 2.0 * p.x * s}; }

enum class HDir { X, Y };

inline Point flow(HDir dir, const Point& p, double s) {
  return dir == HDir::X ? x_flow(p, s) : y_flow(p, s);
}

/// Mapping F = (f1, f2, f3) : U -> H^1, either an analytic rule (exact
/// evaluation anywhere) or values tabulated on the grid nodes (trilinear
/// interpolation inside the box).
struct SampledMap {
  Grid grid;
  std::function<Point(const Point&)> rule;       // set for analytic sources
  std::array<std::vector<double>, 3> values;     // set for tabulated sources

  bool analytic() const { return static_cast<bool>(rule); }

  Point eval(const Point& p) const {
    if (analytic()) return rule(p);
    if (!grid.box.contains(p, 1e-12 * grid.box.diameter()))
      throw std::domain_error("SampledMap: evaluation point outside the tabulated box");
    double out[3];
    for (int c = 0; c < 3; ++c) out[c] = interpolate(values[c], p);
    return {out[0], out[1], out[2]};
  }

 private:
  double interpolate(const std::vector<double>& v, const Point& p) const {
    auto locate = [&](double coord, int axis, int& idx) {
      double u = (coord - grid.box.lo[axis]) / grid.spacing(axis);
      // snap to the node lattice so node evaluation reproduces stored values
      const double r = std::round(u);
      if (std::fabs(u - r) <= 1e-9 * std::max(1.0, std::fabs(u))) u = r;
      idx = static_cast<int>(std::floor(u));
      idx = std::max(0, std::min(grid.n[axis] - 2, idx));
      return u - idx;
    };
    int i, j, k;
    const double fx = locate(p.x, 0, i);
    const double fy = locate(p.y, 1, j);
    const double ft = locate(p.t, 2, k);
    auto at = [&](int di, int dj, int dk) { return v[grid.index(i + di, j + dj, k + dk)]; };
    auto lerp = [](double a, double b, double f) { return (1.0 - f) * a + f * b; };
    const double c00 = lerp(at(0, 0, 0), at(1, 0, 0), fx);
    const double c10 = lerp(at(0, 1, 0), at(1, 1, 0), fx);
    const double c01 = lerp(at(0, 0, 1), at(1, 0, 1), fx);
    const double c11 = lerp(at(0, 1, 1), at(1, 1, 1), fx);
    return lerp(lerp(c00, c10, fy), lerp(c01, c11, fy), ft);
  }
};

inline SampledMap make_analytic_map(std::function<Point(const Point&)> rule, const Grid& grid) {
  SampledMap m;
  m.grid = grid;
  m.rule = std::move(rule);
  return m;
}

inline SampledMap map_identity(const Grid& grid) {
  return make_analytic_map([](const Point& p) { return p; }, grid);
}

inline SampledMap map_dilation(double factor, const Grid& grid) {
  return make_analytic_map([factor](const Point& p) { return dilate(factor, p); }, grid);
}

inline SampledMap map_from_isometry(const Isometry& iso, const Grid& grid) {
  return make_analytic_map([iso](const Point& p) { return apply(iso, p); }, grid);
}

/// Post-composition with an isometry; tabulated maps stay tabulated.
inline SampledMap postcompose(const Isometry& iso, const SampledMap& f) {
  if (f.analytic()) {
    auto rule = f.rule;
    return make_analytic_map([iso, rule](const Point& p) { return apply(iso, rule(p)); },
                             f.grid);
  }
  SampledMap m;
  m.grid = f.grid;
  const std::size_t n = f.grid.size();
  for (int c = 0; c < 3; ++c) m.values[c].resize(n);
  for (std::size_t li = 0; li < n; ++li) {
    const Point q = apply(iso, Point{f.values[0][li], f.values[1][li], f.values[2][li]});
    m.values[0][li] = q.x;
    m.values[1][li] = q.y;
    m.values[2][li] = q.t;
  }
  return m;
}

inline SampledMap tabulate(const SampledMap& f) {
  SampledMap m;
  m.grid = f.grid;
  const std::size_t n = f.grid.size();
  for (int c = 0; c < 3; ++c) m.values[c].resize(n);
  for (std::size_t li = 0; li < n; ++li) {
    const Point q = f.eval(f.grid.node(li));
    m.values[0][li] = q.x;
    m.values[1][li] = q.y;
    m.values[2][li] = q.t;
  }
  return m;
}

/// Default central-difference step along flow lines.
inline double default_step(const SampledMap& f, HDir dir) {
  if (f.analytic()) return 1e-4 * f.grid.box.diameter();
  return f.grid.spacing(dir == HDir::X ? 0 : 1);
}

/// Central difference of all three components along the exact flow line;
/// exact for restrictions that are polynomials of degree <= 2 in the flow time.
inline std::array<double, 3> horizontal_derivative_at(const SampledMap& f, HDir dir,
                                                      const Point& p, double step) {
  const Point fp = f.eval(flow(dir, p, step));
  const Point fm = f.eval(flow(dir, p, -step));
  const double inv2h = 1.0 / (2.0 * step);
  return {(fp.x - fm.x) * inv2h, (fp.y - fm.y) * inv2h, (fp.t - fm.t) * inv2h};
}

inline bool stencil_fits(const SampledMap& f, HDir dir, const Point& p, double step) {
  if (f.analytic()) return true;
  return f.grid.box.contains(flow(dir, p, step)) && f.grid.box.contains(flow(dir, p, -step));
}

inline Mat2 dh_at(const SampledMap& f, const Point& p, double step_x, double step_y) {
  const auto dx = horizontal_derivative_at(f, HDir::X, p, step_x);
  const auto dy = horizontal_derivative_at(f, HDir::Y, p, step_y);
  return {dx[0], dy[0], dx[1], dy[1]};
}

inline Mat2 dh_at(const SampledMap& f, const Point& p) {
  return dh_at(f, p, default_step(f, HDir::X), default_step(f, HDir::Y));
}

/// Per-node 2x2 approximate horizontal differential in the frame {X, Y}.
/// Nodes whose stencil leaves a tabulated box are marked invalid.
struct HField {
  Grid grid;
  std::vector<Mat2> m;
  std::vector<std::uint8_t> valid;

  const Mat2& at(std::size_t node) const {
    if (!valid[node])
      throw std::domain_error("HField: node too close to the box boundary for the stencil");
    return m[node];
  }
  std::size_t valid_count() const {
    std::size_t c = 0;
    for (auto v : valid) c += v;
    return c;
  }
};

inline HField dh(const SampledMap& f, int workers = 1) {
  HField out;
  out.grid = f.grid;
  out.m.resize(f.grid.size());
  out.valid.assign(f.grid.size(), 0);
  const double hx = default_step(f, HDir::X);
  const double hy = default_step(f, HDir::Y);
  parallel_for(f.grid.size(), workers, [&](std::size_t li) {
    const Point p = f.grid.node(li);
    if (!stencil_fits(f, HDir::X, p, hx) || !stencil_fits(f, HDir::Y, p, hy)) return;
    out.m[li] = dh_at(f, p, hx, hy);
    out.valid[li] = 1;
  });
  if (out.valid_count() == 0)
    throw std::domain_error("dh: no node admits the flow-line stencil");
  return out;
}

/// Residuals of the contact condition
///   X f3 = 2 f2 X f1 - 2 f1 X f2   and   Y f3 = 2 f2 Y f1 - 2 f1 Y f2,
/// zero (to scheme order) exactly on contact mappings.
struct ContactResidual {
  Grid grid;
  std::vector<double> rx, ry;
  std::vector<std::uint8_t> valid;

  double sup_abs() const {
    double s = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i)
      if (valid[i]) s = std::max(s, std::max(std::fabs(rx[i]), std::fabs(ry[i])));
    return s;
  }
};

inline ContactResidual contact_residual(const SampledMap& f, int workers = 1) {
  ContactResidual out;
  out.grid = f.grid;
  out.rx.assign(f.grid.size(), 0.0);
  out.ry.assign(f.grid.size(), 0.0);
  out.valid.assign(f.grid.size(), 0);
  const double hx = default_step(f, HDir::X);
  const double hy = default_step(f, HDir::Y);
  parallel_for(f.grid.size(), workers, [&](std::size_t li) {
    const Point p = f.grid.node(li);
    if (!stencil_fits(f, HDir::X, p, hx) || !stencil_fits(f, HDir::Y, p, hy)) return;
    const Point fv = f.eval(p);
    const auto dx = horizontal_derivative_at(f, HDir::X, p, hx);
    const auto dy = horizontal_derivative_at(f, HDir::Y, p, hy);
    out.rx[li] = dx[2] - 2.0 * fv.y * dx[0] + 2.0 * fv.x * dx[1];
    out.ry[li] = dy[2] - 2.0 * fv.y * dy[0] + 2.0 * fv.x * dy[1];
    out.valid[li] = 1;
  });
  if (std::none_of(out.valid.begin(), out.valid.end(), [](std::uint8_t v) { return v != 0; }))
    throw std::domain_error("contact_residual: no node admits the flow-line stencil");
  return out;
}

enum class Orientation { Preserving, Reversing, Mixed };

inline const char* to_string(Orientation o) {
  switch (o) {
    case Orientation::Preserving: return "+1";
    case Orientation::Reversing: return "-1";
    default: return "mixed";
  }
}

/// Quasi-isometry diagnostics over the grid nodes.
struct QIReport {
  double l_est = 1.0;                  // max of sigma_max and 1/sigma_min over nodes
  Orientation orientation = Orientation::Preserving;
  double contact_residual_sup = 0.0;
  double min_abs_det = 0.0;
  std::size_t nodes_evaluated = 0;
};

inline QIReport qi_report(const SampledMap& f, int workers = 1) {
  const HField field = dh(f, workers);
  const ContactResidual res = contact_residual(f, workers);
  QIReport rep;
  rep.l_est = 1.0;
  rep.min_abs_det = std::numeric_limits<double>::infinity();
  bool any_pos = false, any_neg = false;
  for (std::size_t li = 0; li < field.m.size(); ++li) {
    if (!field.valid[li]) continue;
    ++rep.nodes_evaluated;
    const Sv2 sv = singular_values(field.m[li]);
    if (sv.min == 0.0)
      throw std::runtime_error("qi_report: singular horizontal differential at node " +
                               std::to_string(li));
    rep.l_est = std::max(rep.l_est, std::max(sv.max, 1.0 / sv.min));
    const double d = field.m[li].det();
    rep.min_abs_det = std::min(rep.min_abs_det, std::fabs(d));
    (d > 0.0 ? any_pos : any_neg) = true;
  }
  rep.orientation = any_pos && any_neg ? Orientation::Mixed
                    : any_neg          ? Orientation::Reversing
                                       : Orientation::Preserving;
  rep.contact_residual_sup = res.sup_abs();
  return rep;
}

/// Scalar contact Hamiltonian; horizontal derivatives by central flow
/// differences unless closed forms are supplied.
struct Potential {
  std::function<double(const Point&)> value;
  std::function<double(const Point&)> x_deriv;  // optional
  std::function<double(const Point&)> y_deriv;  // optional
  double grad_step = 1e-6;

  double xp(const Point& p) const {
    if (x_deriv) return x_deriv(p);
    return (value(x_flow(p, grad_step)) - value(x_flow(p, -grad_step))) / (2.0 * grad_step);
  }
  double yp(const Point& p) const {
    if (y_deriv) return y_deriv(p);
    return (value(y_flow(p, grad_step)) - value(y_flow(p, -grad_step))) / (2.0 * grad_step);
  }
};

/// Contact vector field of a potential p:
///   V = -(Yp)/4 X + (Xp)/4 Y + p T,
/// the unique vector field with L_V tau = lambda tau and tau(V) = p for the
/// contact form tau = dt + 2(x dy - y dx).  Its flow maps are contact, so for
/// small times they give quasi-isometry test families with L close to 1.
inline SampledMap contact_flow_map(const Potential& potential, double time, int rk_steps,
                                   const Grid& grid, double box_margin_factor = 2.0) {
  if (rk_steps < 1) throw std::invalid_argument("contact_flow_map: need rk_steps >= 1");
  const Box enlarged = grid.box.scaled(box_margin_factor);
  auto velocity = [potential](const Point& p) -> Point {
    const double xp = potential.xp(p);
    const double yp = potential.yp(p);
    const double pv = potential.value(p);
    return {-yp / 4.0, xp / 4.0, pv - 0.5 * (p.y * yp + p.x * xp)};
  };
  auto rule = [velocity, time, rk_steps, enlarged](const Point& start) {
    const double h = time / rk_steps;
    Point p = start;
    auto step_from = [&](const Point& q, const Point& v, double s) -> Point {
      return {q.x + s * v.x, q.y + s * v.y, q.t + s * v.t};
    };
    for (int i = 0; i < rk_steps; ++i) {
      const Point k1 = velocity(p);
      const Point k2 = velocity(step_from(p, k1, 0.5 * h));
      const Point k3 = velocity(step_from(p, k2, 0.5 * h));
      const Point k4 = velocity(step_from(p, k3, h));
      p = {p.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
           p.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
           p.t + h / 6.0 * (k1.t + 2.0 * k2.t + 2.0 * k3.t + k4.t)};
      if (!enlarged.contains(p))
        throw std::runtime_error("contact_flow_map: trajectory exits the enlarged box");
    }
    return p;
  };
  return make_analytic_map(rule, grid);
}

}  // namespace heis
