#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "heis/exec.hpp"
#include "heis/isometry.hpp"
#include "heis/john.hpp"
#include "heis/map.hpp"
#include "heis/quadrature.hpp"
#include "heis/sampling.hpp"
#include "heis/sed.hpp"

namespace heis {

enum class FitBranch { Direct, Reflected };

inline const char* to_string(FitBranch b) {
  return b == FitBranch::Direct ? "direct" : "reflected";
}

/// Best isometry in the d^H minimax sense over the given samples.
struct DHFitResult {
  Isometry iso;              // Psi minimizing sup d^H(Psi(F(x)), x)
  double lambda_hat = 0.0;   // attained minimax value
  Point argmax_point;        // sample where the sup is attained
  FitBranch branch = FitBranch::Direct;
};

struct FitOptions {
  int angle_grid = 720;      // coarse angles over [0, 2pi)
  int golden_iters = 90;     // refinement around the best coarse bracket
  int workers = 1;
};

namespace detail {

/// Minimax value at a fixed rotation angle and branch.  With the rotation
/// fixed, the optimal translation is exact: the center of the smallest disk
/// enclosing the residuals z_i - e^{iB} c(f_i), its radius is the value.
inline Disk dh_angle_disk(const std::vector<Complex>& zs, const std::vector<Complex>& ws,
                          double angle) {
  const Complex rot = std::polar(1.0, angle);
  std::vector<Complex> residuals(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) residuals[i] = zs[i] - rot * ws[i];
  return smallest_enclosing_disk(std::move(residuals));
}

}  // namespace detail

/// Fits sup_i d^H(Psi(F(x_i)), x_i) over the isometry group.
///
/// The minimax decomposes exactly: the planar translation is the smallest
/// enclosing disk center for a fixed angle and branch, so only a 1-D angular
/// search per branch remains (coarse grid, then golden-section refinement on
/// the best bracket).  The vertical translation component is invisible to d^H
/// and set to 0.
inline DHFitResult fit_dh(const std::vector<std::pair<Point, Point>>& samples,
                          const FitOptions& opt = {}) {
  if (samples.size() < 2) throw std::invalid_argument("fit_dh: need at least 2 samples");
  if (opt.angle_grid < 4) throw std::invalid_argument("fit_dh: angle grid too coarse");
  std::vector<Complex> zs(samples.size()), fs(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    zs[i] = samples[i].first.z();
    fs[i] = samples[i].second.z();
  }
  double spread = 0.0;
  for (const auto& z : zs) spread = std::max(spread, std::abs(z - zs[0]));
  if (spread == 0.0)
    throw std::invalid_argument("fit_dh: degenerate planar projections (all z_i equal)");

  const double two_pi = 2.0 * std::numbers::pi;
  Disk best_disk;
  double best_value = std::numeric_limits<double>::infinity();
  double best_angle = 0.0;
  bool best_reflected = false;

  for (int branch = 0; branch < 2; ++branch) {
    const bool reflected = branch == 1;
    std::vector<Complex> ws(fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i) ws[i] = reflected ? std::conj(fs[i]) : fs[i];

    std::vector<double> radii(opt.angle_grid);
    parallel_for(static_cast<std::size_t>(opt.angle_grid), opt.workers, [&](std::size_t k) {
      radii[k] = detail::dh_angle_disk(zs, ws, two_pi * static_cast<double>(k) / opt.angle_grid)
                     .radius;
    });
    int k_best = 0;
    for (int k = 1; k < opt.angle_grid; ++k)
      if (radii[k] < radii[k_best]) k_best = k;

    const double step = two_pi / opt.angle_grid;
    double refined_angle = two_pi * k_best / opt.angle_grid;
    golden_min([&](double a) { return detail::dh_angle_disk(zs, ws, a).radius; },
               refined_angle - step, refined_angle + step, opt.golden_iters, &refined_angle);
    const Disk disk = detail::dh_angle_disk(zs, ws, refined_angle);
    if (disk.radius < best_value) {
      best_value = disk.radius;
      best_disk = disk;
      best_angle = refined_angle;
      best_reflected = reflected;
    }
  }

  DHFitResult out;
  out.branch = best_reflected ? FitBranch::Reflected : FitBranch::Direct;
  out.iso.reflect = best_reflected;
  out.iso.angle = normalize_angle(best_angle);
  out.iso.trans = make_point(best_disk.center, 0.0);
  out.lambda_hat = best_value;
  double worst = -1.0;
  for (const auto& [x, fx] : samples) {
    const double dev = std::abs(apply_planar(out.iso, fx.z()) - x.z());
    if (dev > worst) {
      worst = dev;
      out.argmax_point = x;
    }
  }
  out.lambda_hat = std::max(out.lambda_hat, worst);
  return out;
}

inline DHFitResult fit_dh_on_ball(const SampledMap& f, const Ball& ball, int n_samples = 600,
                                  const FitOptions& opt = {}) {
  std::vector<std::pair<Point, Point>> samples;
  samples.reserve(n_samples);
  for (const auto& x : sample_ball(ball, n_samples)) samples.emplace_back(x, f.eval(x));
  return fit_dh(samples, opt);
}

/// Isometry R_A o pi_a with a = F(0)^{-1} and A = -arg(f(1,0) - f(0,0)).
/// Already-normalized maps (bit-zero base point, anchor angle at rounding
/// level) get the exact identity, which makes normalization idempotent.
inline Isometry normalizing_isometry(const SampledMap& f) {
  const Point w0 = f.eval({0.0, 0.0, 0.0});
  const Point w1 = f.eval({1.0, 0.0, 0.0});
  const Complex diff = w1.z() - w0.z();
  if (std::abs(diff) == 0.0)
    throw std::invalid_argument("normalize: coincident anchor values f(1,0,0) = f(0,0,0)");
  const bool canonical = w0.x == 0.0 && w0.y == 0.0 && w0.t == 0.0 &&
                         std::fabs(diff.imag()) <= 1e-13 * std::abs(diff) && diff.real() > 0.0;
  if (canonical) return iso_identity();
  const double angle = -std::atan2(diff.imag(), diff.real());
  return compose(iso_rotation(angle), iso_translation(inv(w0)));
}

/// Normalization F_N: fixes the origin and turns the first complex coordinate
/// of F(1,0,0) real nonnegative.
inline SampledMap normalize(const SampledMap& f) {
  return postcompose(normalizing_isometry(f), f);
}

struct VerticalAdjustResult {
  double beta = 0.0;         // the vertical shift b = (0, 0, beta)
  double sup_rho = 0.0;      // sampled sup of rho(b * F(x), Phi(x)) over B(a, r)
  double sup_dh = 0.0;       // sampled sup of d^H(F(x), Phi(x)) over B(a, r)
  double dh_sum_norm = 0.0;  // sampled sup of |D_h F + D_h Phi|
};

/// Vertical adjustment: beta kills the third coordinate of (Phi(a))^{-1} F(a),
/// after which the rho-proximity of b*F to Phi is controlled by
/// (eps + sqrt(2 eps |D_h F + D_h Phi|_inf)) r with eps r the d^H sup.
inline VerticalAdjustResult vertical_adjust(const SampledMap& f, const Isometry& phi,
                                            const Point& a, double r, int n_samples = 2048) {
  if (!(r > 0.0)) throw std::invalid_argument("vertical_adjust: need r > 0");
  VerticalAdjustResult out;
  out.beta = -mul(inv(apply(phi, a)), f.eval(a)).t;
  const Point b{0.0, 0.0, out.beta};
  const Ball ball{a, r, Metric::CC};
  out.sup_rho = sup_over_ball(
      [&](const Point& x) { return koranyi_dist(mul(b, f.eval(x)), apply(phi, x)); }, ball,
      n_samples);
  out.sup_dh = sup_over_ball(
      [&](const Point& x) { return dh_dist(f.eval(x), apply(phi, x)); }, ball, n_samples);
  const Mat2 dphi = horizontal_matrix(phi);
  out.dh_sum_norm = sup_over_ball(
      [&](const Point& x) { return op_norm(dh_at(f, x) + dphi); }, ball, n_samples / 2);
  return out;
}

/// The three deviations of the rigidity estimates for one map on one domain.
struct FullFitResult {
  Isometry iso;              // the approximating isometry phi
  double lambda_hat = 0.0;   // inner d^H minimax value
  double sup_d = 0.0;        // sampled sup of d(F(x), phi(x))
  double sup_dh = 0.0;       // sampled sup of d^H(F(x), phi(x))
  double sobolev_dev = 0.0;  // L2 norm of |D_h F - D_h phi| over the domain core
};

struct FullFitOptions {
  int fit_samples = 600;
  int sup_samples = 4096;
  int quad_nodes = 25;       // nodes per axis for the Sobolev quadrature grid
  double core_factor = 0.9;  // domain core shrink for the L2 norm
  FitOptions fit;
};

namespace detail {

inline Grid quadrature_grid(const JohnDomain& d, int nodes) {
  Box b;
  if (d.kind == DomainKind::CcBall) {
    const double r = d.ball_radius;
    b.lo = {d.ball_center.x - r, d.ball_center.y - r,
            d.ball_center.t - r * r / std::numbers::pi};
    b.hi = {d.ball_center.x + r, d.ball_center.y + r,
            d.ball_center.t + r * r / std::numbers::pi};
  } else {
    b = d.box;
  }
  return Grid(b, {nodes, nodes, nodes});
}

}  // namespace detail

/// Fits the best isometry in the d^H sense, inverts it, applies the vertical
/// adjustment at the distinguished point and reports the three proximity
/// quantities (uniform CC, uniform d^H, Sobolev L2 of the differentials).
inline FullFitResult full_fit(const SampledMap& f, const JohnDomain& domain,
                              const FullFitOptions& opt = {}) {
  std::vector<std::pair<Point, Point>> samples;
  samples.reserve(opt.fit_samples);
  for (const auto& x : sample_domain(domain, opt.fit_samples)) samples.emplace_back(x, f.eval(x));
  const DHFitResult fit = fit_dh(samples, opt.fit);

  // phi = pi_{(0,0,-beta)} o Psi^{-1}, the vertical part fixed by exact
  // cancellation at the distinguished point
  const Isometry psi_inv = inverse(fit.iso);
  const double beta = -mul(inv(apply(psi_inv, domain.x_star)), f.eval(domain.x_star)).t;
  const Isometry phi = compose(iso_translation({0.0, 0.0, -beta}), psi_inv);

  FullFitResult out;
  out.iso = phi;
  out.lambda_hat = fit.lambda_hat;
  out.sup_d = sup_over_domain(
      [&](const Point& x) { return cc_dist(f.eval(x), apply(phi, x)); }, domain,
      opt.sup_samples);
  out.sup_dh = sup_over_domain(
      [&](const Point& x) { return dh_dist(f.eval(x), apply(phi, x)); }, domain,
      opt.sup_samples);

  const Grid qgrid = detail::quadrature_grid(domain, opt.quad_nodes);
  const Mat2 dphi = horizontal_matrix(phi);
  auto dev = [&](const Point& x) { return op_norm(dh_at(f, x) - dphi); };
  if (domain.kind == DomainKind::CcBall) {
    const Ball core{domain.ball_center, opt.core_factor * domain.ball_radius, Metric::CC};
    out.sobolev_dev = lp_norm(qgrid, core, dev, 2.0);
  } else {
    const Grid core_grid(qgrid.box.scaled(opt.core_factor),
                         {opt.quad_nodes, opt.quad_nodes, opt.quad_nodes});
    double acc = 0.0;
    for (std::size_t c = 0; c < core_grid.cell_count(); ++c) {
      const double v = dev(core_grid.cell_center(c));
      acc += v * v * core_grid.cell_volume();
    }
    out.sobolev_dev = std::sqrt(acc);
  }
  return out;
}

}  // namespace heis
