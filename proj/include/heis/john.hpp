#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heis/cc.hpp"
#include "heis/isometry.hpp"
#include "heis/map.hpp"
#include "heis/point.hpp"
#include "heis/sampling.hpp"

namespace heis {

enum class DomainKind { CcBall, CoordBox };

/// John domain with distinguished point x_star, inner radius alpha and outer
/// radius beta.  Supported kinds: CC balls (alpha = beta = radius, exact) and
/// coordinate boxes (radii estimated by sampled boundary-distance
/// extremization from the center).
struct JohnDomain {
  DomainKind kind = DomainKind::CcBall;
  Point ball_center;
  double ball_radius = 1.0;
  Box box;
  Point x_star;
  double alpha = 1.0;
  double beta = 1.0;
};

inline bool domain_contains(const JohnDomain& d, const Point& p) {
  if (d.kind == DomainKind::CcBall) return cc_dist(d.ball_center, p) < d.ball_radius;
  return d.box.contains(p);
}

namespace detail {

/// Extremizes cc_dist(from, .) over one box face: coarse grid then a
/// shrinking compass search clamped to the face rectangle.
inline double box_face_extremum(const Box& box, const Point& from, int axis, int side,
                                bool maximize, int m_grid, int refine_iters) {
  const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
  const double fixed = side ? box.hi[axis] : box.lo[axis];
  auto face_point = [&](double u, double v) {
    double c[3];
    c[axis] = fixed;
    c[a1] = u;
    c[a2] = v;
    return Point{c[0], c[1], c[2]};
  };
  auto score = [&](double u, double v) {
    const double dist = cc_dist(from, face_point(u, v));
    return maximize ? -dist : dist;
  };
  const double lo1 = box.lo[a1], hi1 = box.hi[a1];
  const double lo2 = box.lo[a2], hi2 = box.hi[a2];

  // coarse grid, then shrinking compass searches from the three best cells
  std::vector<std::array<double, 3>> cells;  // (score, u, v)
  cells.reserve(static_cast<std::size_t>(m_grid) * m_grid);
  for (int i = 0; i < m_grid; ++i) {
    for (int j = 0; j < m_grid; ++j) {
      const double u = lo1 + (hi1 - lo1) * i / (m_grid - 1);
      const double v = lo2 + (hi2 - lo2) * j / (m_grid - 1);
      cells.push_back({score(u, v), u, v});
    }
  }
  std::partial_sort(cells.begin(), cells.begin() + std::min<std::size_t>(3, cells.size()),
                    cells.end());
  double best = cells[0][0];
  for (std::size_t start = 0; start < std::min<std::size_t>(3, cells.size()); ++start) {
    double bu = cells[start][1], bv = cells[start][2], cur = cells[start][0];
    double step1 = (hi1 - lo1) / m_grid, step2 = (hi2 - lo2) / m_grid;
    for (int it = 0; it < refine_iters; ++it) {
      bool improved = false;
      const double cand[8][2] = {{bu + step1, bv},        {bu - step1, bv},
                                 {bu, bv + step2},        {bu, bv - step2},
                                 {bu + step1, bv + step2}, {bu + step1, bv - step2},
                                 {bu - step1, bv + step2}, {bu - step1, bv - step2}};
      for (const auto& c : cand) {
        const double u = std::clamp(c[0], lo1, hi1);
        const double v = std::clamp(c[1], lo2, hi2);
        const double s = score(u, v);
        if (s < cur) {
          cur = s;
          bu = u;
          bv = v;
          improved = true;
        }
      }
      if (!improved) {
        step1 *= 0.5;
        step2 *= 0.5;
        if (step1 < 1e-7 * (hi1 - lo1)) break;
      }
    }
    best = std::min(best, cur);
  }
  return maximize ? -best : best;
}

inline double box_boundary_extremum(const Box& box, const Point& from, bool maximize,
                                    int m_grid, int refine_iters) {
  double out = maximize ? 0.0 : std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      const double v = box_face_extremum(box, from, axis, side, maximize, m_grid, refine_iters);
      out = maximize ? std::max(out, v) : std::min(out, v);
    }
  }
  return out;
}

}  // namespace detail

/// CC distance to the domain boundary.
inline double dist_to_boundary(const JohnDomain& d, const Point& p, int m_grid = 9,
                               int refine_iters = 40) {
  if (d.kind == DomainKind::CcBall) {
    const double dist = d.ball_radius - cc_dist(d.ball_center, p);
    if (dist <= 0.0) throw std::domain_error("dist_to_boundary: point outside the ball");
    return dist;
  }
  if (!d.box.contains(p)) throw std::domain_error("dist_to_boundary: point outside the box");
  return detail::box_boundary_extremum(d.box, p, false, m_grid, refine_iters);
}

inline JohnDomain make_cc_ball_domain(const Point& center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("make_cc_ball_domain: radius must be positive");
  JohnDomain d;
  d.kind = DomainKind::CcBall;
  d.ball_center = center;
  d.ball_radius = radius;
  d.x_star = center;
  d.alpha = radius;
  d.beta = radius;
  return d;
}

/// Box John radii.  The outer radius is the CC circumradius from the center.
/// The inradius is NOT always a valid inner radius: leaving the center, the
/// boundary distance of any horizontal unit-speed curve can drop at rate up
/// to 1 in a coordinate direction, so for corner points (curve length above
/// the inradius) the twisted-cone slope inradius/length is unattainable.
/// The inner radius is therefore estimated as the largest cone slope the
/// radial-geodesic witnesses realize over boundary-approaching probe points,
/// capped by the inradius.
inline JohnDomain make_box_domain(const Box& box, int m_grid = 11, int refine_iters = 48) {
  for (int a = 0; a < 3; ++a) {
    if (!(box.hi[a] - box.lo[a] > 1e-9))
      throw std::invalid_argument("make_box_domain: degenerate box");
  }
  JohnDomain d;
  d.kind = DomainKind::CoordBox;
  d.box = box;
  d.x_star = box.center();
  d.alpha = detail::box_boundary_extremum(box, d.x_star, false, m_grid, refine_iters);
  d.beta = detail::box_boundary_extremum(box, d.x_star, true, m_grid, refine_iters);
  if (!(d.alpha > 0.0) || d.beta < d.alpha)
    throw std::runtime_error("make_box_domain: inconsistent radii estimate");

  // probe the geodesic witnesses from near-boundary points: corners, edge
  // midpoints and face centers pulled inward
  std::vector<Point> probes;
  const Point c = d.x_star;
  const double sx = 0.5 * box.extent(0), sy = 0.5 * box.extent(1), st = 0.5 * box.extent(2);
  const double pull = 0.97;
  for (int ix : {-1, 0, 1})
    for (int iy : {-1, 0, 1})
      for (int it : {-1, 0, 1}) {
        if (ix == 0 && iy == 0 && it == 0) continue;
        probes.push_back({c.x + pull * sx * ix, c.y + pull * sy * iy, c.t + pull * st * it});
      }
  double slope = std::numeric_limits<double>::infinity();
  for (const auto& x : probes) {
    const double l = cc_dist(x, c);
    if (l <= d.alpha) continue;  // short curves realize the inradius slope
    for (int i = 1; i <= 16; ++i) {
      const double s = l * i / 17.0;
      const Point g = detail::geodesic_point(x, c, s / l);
      // fixed resolution for the witness profiles; the caller's grid only
      // refines the inradius/circumradius extremization
      const double du = detail::box_boundary_extremum(box, g, false, 9, 48);
      slope = std::min(slope, l * du / s);
    }
  }
  if (std::isfinite(slope)) d.alpha = std::min(d.alpha, 0.98 * slope);
  if (!(d.alpha > 0.0))
    throw std::runtime_error("make_box_domain: no admissible inner radius found");
  return d;
}

inline std::pair<double, double> john_params(const JohnDomain& d) { return {d.alpha, d.beta}; }

inline std::vector<Point> sample_domain(const JohnDomain& d, int n) {
  if (d.kind == DomainKind::CcBall) return sample_ball({d.ball_center, d.ball_radius, Metric::CC}, n);
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::uint64_t i = 0; static_cast<int>(pts.size()) < n; ++i) {
    pts.push_back({d.box.lo[0] + d.box.extent(0) * halton(i, 2),
                   d.box.lo[1] + d.box.extent(1) * halton(i, 3),
                   d.box.lo[2] + d.box.extent(2) * halton(i, 5)});
  }
  return pts;
}

/// Sampled sup of a scalar function over the domain, refined near the argmax.
inline double sup_over_domain(const std::function<double(const Point&)>& f, const JohnDomain& d,
                              int n_samples = 4096, int refine_rounds = 24) {
  const auto pts = sample_domain(d, n_samples);
  double best = -std::numeric_limits<double>::infinity();
  Point best_p = d.x_star;
  for (const auto& p : pts) {
    const double v = f(p);
    if (v > best) {
      best = v;
      best_p = p;
    }
  }
  const double scale = d.beta;
  double step = 0.25;
  for (int round = 0; round < refine_rounds; ++round) {
    bool improved = false;
    const Point deltas[6] = {{step * scale, 0, 0},
                             {-step * scale, 0, 0},
                             {0, step * scale, 0},
                             {0, -step * scale, 0},
                             {0, 0, step * step * scale * scale},
                             {0, 0, -step * step * scale * scale}};
    for (const auto& dlt : deltas) {
      const Point q{best_p.x + dlt.x, best_p.y + dlt.y, best_p.t + dlt.t};
      if (!domain_contains(d, q)) continue;
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

struct ChainBall {
  Point center;
  double radius = 0.0;
  double arclength = 0.0;  // position of the center along the John curve, from x
};

struct BallChain {
  std::vector<ChainBall> balls;  // B_0 ... B_k with B_0 at x_star and B_k at x
  std::vector<ChainBall> links;  // D_0 ... D_{k-1}
  double kappa = 1.0;
};

class ChainClauseError : public std::runtime_error {
 public:
  ChainClauseError(int clause, std::size_t index, const std::string& what)
      : std::runtime_error("chain clause " + std::to_string(clause) + " failed at index " +
                           std::to_string(index) + ": " + what),
        clause_(clause),
        index_(index) {}
  int clause() const { return clause_; }
  std::size_t index() const { return index_; }

 private:
  int clause_;
  std::size_t index_;
};

/// Checks the three chain clauses:
///  (1) kappa-enlargements inside U and d(x, x_i) <= (kappa beta / alpha) r_i,
///  (2) consecutive radius ratios within [(2k-1)/(2k+1), (2k+1)/(2k-1)] and
///      sum_{i<=k-2} r_i + r_k <= 2 beta,
///  (3) linking balls D_i with rho_i = min(r_i, r_{i+1})/2 sitting in
///      (1/2)B_i cap (1/2)B_{i+1}, D_i inside both balls, and
///      B_k inside (3 + 2(kappa+1) beta/alpha) D_i.
inline void verify_chain(const JohnDomain& d, const BallChain& chain, const Point& x) {
  const double kappa = chain.kappa;
  const double slack = 1.0 + 1e-9;
  const auto& b = chain.balls;
  if (b.empty()) throw ChainClauseError(1, 0, "empty chain");
  const std::size_t k = b.size() - 1;

  for (std::size_t i = 0; i <= k; ++i) {
    if (!domain_contains(d, b[i].center))
      throw ChainClauseError(1, i, "ball center left the domain");
    const double du = dist_to_boundary(d, b[i].center);
    if (kappa * b[i].radius > du * slack)
      throw ChainClauseError(1, i, "kappa-enlargement exits the domain");
    if (i < k) {
      const double reach = cc_dist(x, b[i].center);
      if (reach > kappa * (d.beta / d.alpha) * b[i].radius * slack)
        throw ChainClauseError(1, i, "center too far from the query point");
    }
  }

  const double lo_ratio = (2.0 * kappa - 1.0) / (2.0 * kappa + 1.0);
  double radius_sum = b[k].radius;
  for (std::size_t i = 0; i + 1 <= k; ++i) {
    const double ratio = b[i].radius / b[i + 1].radius;
    if (ratio < lo_ratio / slack || ratio > slack / lo_ratio)
      throw ChainClauseError(2, i, "consecutive radius ratio out of range");
    if (i + 2 <= k) radius_sum += b[i].radius;
  }
  if (radius_sum > 2.0 * d.beta * slack)
    throw ChainClauseError(2, k, "radius sum exceeds 2 beta");

  const double containment = 3.0 + 2.0 * (kappa + 1.0) * d.beta / d.alpha;
  if (chain.links.size() + 1 != b.size())
    throw ChainClauseError(3, chain.links.size(), "link count mismatch");
  for (std::size_t i = 0; i + 1 <= k; ++i) {
    const ChainBall& link = chain.links[i];
    const double rho = 0.5 * std::min(b[i].radius, b[i + 1].radius);
    if (std::fabs(link.radius - rho) > 1e-12 * rho)
      throw ChainClauseError(3, i, "link radius is not min(r_i, r_{i+1})/2");
    const double d_i = cc_dist(b[i].center, link.center);
    const double d_ip = cc_dist(b[i + 1].center, link.center);
    if (d_i > 0.5 * b[i].radius * slack || d_ip > 0.5 * b[i + 1].radius * slack)
      throw ChainClauseError(3, i, "link center outside the half balls");
    if (d_i + link.radius > b[i].radius * slack || d_ip + link.radius > b[i + 1].radius * slack)
      throw ChainClauseError(3, i, "link ball not inside both balls");
    if (cc_dist(link.center, b[k].center) + b[k].radius > containment * link.radius * slack)
      throw ChainClauseError(3, i, "B_k not inside the enlarged link ball");
  }
}

/// Chain of balls along the John curve from x to x_star.
///
/// The curve is the radial CC geodesic (exact for balls; admissible for the
/// supported boxes, checked against the twisted-cone condition in the tests).
/// Centers walk the curve with step 0.9 * 2 d_U / (2 kappa - 1), the largest
/// growth the clause-2 ratio bound allows with a margin; radii are
/// d_U(center)/kappa, the largest admissible under clause 1.  A step is
/// halved until the linking ball of clause 3 fits between the neighbours.
inline BallChain build_chain(const JohnDomain& d, const Point& x, double kappa,
                             bool check = true) {
  if (!(kappa >= 1.0)) throw std::invalid_argument("build_chain: need kappa >= 1");
  if (!domain_contains(d, x)) throw std::invalid_argument("build_chain: x outside the domain");
  BallChain chain;
  chain.kappa = kappa;

  const double l = cc_dist(x, d.x_star);
  auto curve = [&](double s) { return l > 0.0 ? detail::geodesic_point(x, d.x_star, s / l) : x; };

  std::vector<ChainBall> walk;  // from x toward x_star
  double s = 0.0;
  double du = dist_to_boundary(d, x);
  for (int guard = 0; guard < 100000; ++guard) {
    walk.push_back({curve(s), du / kappa, s});
    if (s >= l) break;
    double step = std::min(0.9 * 2.0 * du / (2.0 * kappa - 1.0), l - s);
    double du_next = 0.0;
    const double ratio_cap = 0.999 * (2.0 * kappa + 1.0) / (2.0 * kappa - 1.0);
    for (int halvings = 0; halvings < 60; ++halvings) {
      du_next = dist_to_boundary(d, curve(s + step));
      // both half-balls must reach across the gap, and the radius ratio must
      // stay inside the clause-2 window even where d_U dips along the curve
      const double ratio = std::max(du, du_next) / std::min(du, du_next);
      if (step <= 0.49 * (du + du_next) / kappa && ratio <= ratio_cap) break;
      step *= 0.5;
    }
    if (!(step > 0.0)) throw std::runtime_error("build_chain: walk stalled");
    s += step;
    du = du_next;
  }
  if (walk.back().arclength < l) throw std::runtime_error("build_chain: walk did not reach x_star");

  chain.balls.assign(walk.rbegin(), walk.rend());
  const std::size_t k = chain.balls.size() - 1;
  chain.links.reserve(k);
  for (std::size_t i = 0; i + 1 <= k; ++i) {
    // place the link on the curve inside both half balls: the feasible offset
    // h from the smaller-side center satisfies gap - h <= r_i / 2 and
    // h <= r_{i+1} / 2; take the middle of that interval
    const double gap = chain.balls[i].arclength - chain.balls[i + 1].arclength;
    const double h_lo = std::max(0.0, gap - 0.49 * chain.balls[i].radius);
    const double h_hi = std::min(gap, 0.49 * chain.balls[i + 1].radius);
    if (h_lo > h_hi)
      throw ChainClauseError(3, i, "no feasible link position between the neighbours");
    const double h = 0.5 * (h_lo + h_hi);
    const double at = chain.balls[i + 1].arclength + h;
    const double rho = 0.5 * std::min(chain.balls[i].radius, chain.balls[i + 1].radius);
    chain.links.push_back({curve(at), rho, at});
  }
  if (check) verify_chain(d, chain, x);
  return chain;
}

/// Explicit local-to-global constant.
inline double propagation_constant(double kappa, double l_qi, double beta_over_alpha) {
  return 8.0 * kappa / (2.0 * kappa - 1.0) *
         (4.0 * l_qi * kappa * beta_over_alpha + 2.0 * l_qi + 1.0);
}

using BallFitter = std::function<Isometry(const Ball&)>;

struct PropagateResult {
  Isometry phi_star;
  double sup_dh = 0.0;
  double sup_rho = 0.0;
  double c1 = 0.0;
  double dh_bound = 0.0;   // c1 sigma beta
  double rho_bound = 0.0;  // (c1 sigma + sqrt(2 (L+1) c1 sigma)) beta
};

/// Local-to-global propagation: fits one isometry on the distinguished ball
/// B_0 = B(x_star, d_U(x_star)/kappa), cancels the vertical discrepancy at
/// x_star, and measures the global d^H and rho deviations.  sigma_hat and
/// l_est parametrize the bounds the harness asserts.
inline PropagateResult propagate_global(const JohnDomain& d, const SampledMap& f,
                                        const BallFitter& fitter, double kappa,
                                        double sigma_hat, double l_est, int n_samples = 4096) {
  const double du_star = dist_to_boundary(d, d.x_star);
  const Ball b0{d.x_star, du_star / kappa, Metric::CC};
  const Isometry phi0 = fitter(b0);
  const double s = -mul(inv(d.x_star), apply(phi0, f.eval(d.x_star))).t;
  PropagateResult out;
  out.phi_star = compose(iso_translation({0.0, 0.0, s}), phi0);
  out.sup_dh = sup_over_domain(
      [&](const Point& p) { return dh_dist(apply(out.phi_star, f.eval(p)), p); }, d, n_samples);
  out.sup_rho = sup_over_domain(
      [&](const Point& p) { return koranyi_dist(apply(out.phi_star, f.eval(p)), p); }, d,
      n_samples);
  out.c1 = propagation_constant(kappa, l_est, d.beta / d.alpha);
  out.dh_bound = out.c1 * sigma_hat * d.beta;
  out.rho_bound =
      (out.c1 * sigma_hat + std::sqrt(2.0 * (l_est + 1.0) * out.c1 * sigma_hat)) * d.beta;
  return out;
}

}  // namespace heis
