#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "heis/grid.hpp"
#include "heis/john.hpp"
#include "heis/map.hpp"
#include "heis/quadrature.hpp"

namespace heis {

/// Complex-valued field with its horizontal complex derivatives
///   Z = (X - iY)/2,   Zbar = (X + iY)/2,
/// assembled per grid node by central differences along the exact flows.
struct ComplexField {
  Grid grid;
  std::function<Complex(const Point&)> rule;
  std::vector<Complex> u, zu, zbu;
  double step = 0.0;
};

namespace detail {

inline Complex flow_derivative(const std::function<Complex(const Point&)>& rule, HDir dir,
                               const Point& p, double step) {
  return (rule(flow(dir, p, step)) - rule(flow(dir, p, -step))) / (2.0 * step);
}

}  // namespace detail

inline ComplexField make_complex_field(std::function<Complex(const Point&)> rule,
                                       const Grid& grid, double step = 0.0) {
  ComplexField f;
  f.grid = grid;
  f.rule = std::move(rule);
  f.step = step > 0.0 ? step : 1e-4 * grid.box.diameter();
  const std::size_t n = grid.size();
  f.u.resize(n);
  f.zu.resize(n);
  f.zbu.resize(n);
  const Complex ihalf(0.0, 0.5);
  for (std::size_t li = 0; li < n; ++li) {
    const Point p = grid.node(li);
    f.u[li] = f.rule(p);
    const Complex xu = detail::flow_derivative(f.rule, HDir::X, p, f.step);
    const Complex yu = detail::flow_derivative(f.rule, HDir::Y, p, f.step);
    f.zu[li] = 0.5 * xu - ihalf * yu;
    f.zbu[li] = 0.5 * xu + ihalf * yu;
  }
  return f;
}

/// Q u = ( (Zu + conj(Zu))/2 , Zbar u ); the first component is real.
struct QValues {
  std::vector<double> sym;       // (Zu + conj Zu)/2
  std::vector<Complex> zbar;     // Zbar u

  double sup_abs() const {
    double s = 0.0;
    for (std::size_t i = 0; i < sym.size(); ++i)
      s = std::max(s, std::hypot(sym[i], std::abs(zbar[i])));
    return s;
  }
};

inline QValues q_apply(const ComplexField& f) {
  QValues q;
  q.sym.resize(f.zu.size());
  q.zbar = f.zbu;
  for (std::size_t i = 0; i < f.zu.size(); ++i) q.sym[i] = f.zu[i].real();
  return q;
}

/// |Q u| at an arbitrary point, for quadrature over balls.
inline double q_abs_at(const std::function<Complex(const Point&)>& rule, const Point& p,
                       double step) {
  const Complex xu = detail::flow_derivative(rule, HDir::X, p, step);
  const Complex yu = detail::flow_derivative(rule, HDir::Y, p, step);
  const Complex zu = 0.5 * xu - Complex(0.0, 0.5) * yu;
  const Complex zbu = 0.5 * xu + Complex(0.0, 0.5) * yu;
  return std::hypot(zu.real(), std::abs(zbu));
}

/// Coordinates in ker Q: u = a + i k z + t b + i z^2 conj(b) + i |z|^2 b,
/// a real 5-parameter family (a, b complex, k real).
struct KernelParams {
  Complex a{0.0, 0.0};
  double k = 0.0;
  Complex b{0.0, 0.0};
};

inline std::function<Complex(const Point&)> kernel_rule(const KernelParams& params) {
  return [params](const Point& p) {
    const Complex z = p.z();
    const Complex i(0.0, 1.0);
    return params.a + i * params.k * z + p.t * params.b + i * z * z * std::conj(params.b) +
           i * std::norm(z) * params.b;
  };
}

inline ComplexField kernel_field(const KernelParams& params, const Grid& grid,
                                 double step = 0.0) {
  return make_complex_field(kernel_rule(params), grid, step);
}

namespace detail {

/// Raw generators of ker Q as coefficient directions of (Re a, Im a, k, Re b, Im b).
inline std::array<std::function<Complex(const Point&)>, 5> kernel_basis() {
  return {kernel_rule({{1.0, 0.0}, 0.0, {0.0, 0.0}}),
          kernel_rule({{0.0, 1.0}, 0.0, {0.0, 0.0}}),
          kernel_rule({{0.0, 0.0}, 1.0, {0.0, 0.0}}),
          kernel_rule({{0.0, 0.0}, 0.0, {1.0, 0.0}}),
          kernel_rule({{0.0, 0.0}, 0.0, {0.0, 1.0}})};
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
template <int N>
inline std::array<double, N> jacobi_eigenvalues(std::array<std::array<double, N>, N> m) {
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j) off += m[i][j] * m[i][j];
    if (off < 1e-30) break;
    for (int p = 0; p < N; ++p) {
      for (int q = p + 1; q < N; ++q) {
        if (std::fabs(m[p][q]) < 1e-300) continue;
        const double theta = 0.5 * std::atan2(2.0 * m[p][q], m[q][q] - m[p][p]);
        const double c = std::cos(theta), s = std::sin(theta);
        for (int k = 0; k < N; ++k) {
          const double mkp = m[k][p], mkq = m[k][q];
          m[k][p] = c * mkp - s * mkq;
          m[k][q] = s * mkp + c * mkq;
        }
        for (int k = 0; k < N; ++k) {
          const double mpk = m[p][k], mqk = m[q][k];
          m[p][k] = c * mpk - s * mqk;
          m[q][k] = s * mpk + c * mqk;
        }
      }
    }
  }
  std::array<double, N> ev;
  for (int i = 0; i < N; ++i) ev[i] = m[i][i];
  return ev;
}

}  // namespace detail

/// Discrete L2(ball) projection onto ker Q.
///
/// ker Q is a real 5-dimensional space, so the projection uses the real inner
/// product Re(integral of u conj(v)); complex coefficients would enlarge the
/// span beyond the kernel.  Gram system solved by Cholesky (equivalent to
/// orthonormalizing the generators in the quadrature inner product).
inline KernelParams project_kernel(const std::function<Complex(const Point&)>& u,
                                   const Ball& ball, const Grid& grid) {
  const CellSet cells = cells_in_ball(grid, ball);
  const auto basis = detail::kernel_basis();

  std::vector<std::array<Complex, 5>> bvals(cells.centers.size());
  std::vector<Complex> uvals(cells.centers.size());
  for (std::size_t c = 0; c < cells.centers.size(); ++c) {
    uvals[c] = u(cells.centers[c]);
    for (int i = 0; i < 5; ++i) bvals[c][i] = basis[i](cells.centers[c]);
  }

  std::array<std::array<double, 5>, 5> gram{};
  std::array<double, 5> rhs{};
  for (std::size_t c = 0; c < cells.centers.size(); ++c) {
    for (int i = 0; i < 5; ++i) {
      rhs[i] += (uvals[c] * std::conj(bvals[c][i])).real() * cells.weight;
      for (int j = i; j < 5; ++j)
        gram[i][j] += (bvals[c][i] * std::conj(bvals[c][j])).real() * cells.weight;
    }
  }
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < i; ++j) gram[i][j] = gram[j][i];

  const auto ev = detail::jacobi_eigenvalues<5>(gram);
  const double emax = *std::max_element(ev.begin(), ev.end());
  const double emin = *std::min_element(ev.begin(), ev.end());
  if (!(emin > 0.0) || emax / emin > 1e8)
    throw std::runtime_error("project_kernel: Gram matrix ill-conditioned");

  // Cholesky solve of gram * c = rhs
  std::array<std::array<double, 5>, 5> l{};
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = gram[i][j];
      for (int k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (i == j)
        l[i][i] = std::sqrt(s);
      else
        l[i][j] = s / l[j][j];
    }
  }
  std::array<double, 5> y{}, c{};
  for (int i = 0; i < 5; ++i) {
    double s = rhs[i];
    for (int k = 0; k < i; ++k) s -= l[i][k] * y[k];
    y[i] = s / l[i][i];
  }
  for (int i = 4; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < 5; ++k) s -= l[k][i] * c[k];
    c[i] = s / l[i][i];
  }
  return {{c[0], c[1]}, c[2], {c[3], c[4]}};
}

inline KernelParams project_kernel(const ComplexField& f, const Ball& ball) {
  return project_kernel(f.rule, ball, f.grid);
}

/// |D_h u| for a complex field u = u1 + i u2, spectral norm of the 2x2 block.
inline double dh_abs_at(const std::function<Complex(const Point&)>& rule, const Point& p,
                        double step) {
  const Complex xu = detail::flow_derivative(rule, HDir::X, p, step);
  const Complex yu = detail::flow_derivative(rule, HDir::Y, p, step);
  return op_norm({xu.real(), yu.real(), xu.imag(), yu.imag()});
}

/// ||D_h u||_p,ball / ( sup_ball |u| + ||Q u||_p,ball ).
inline double coercive_ratio(const std::function<Complex(const Point&)>& rule, const Ball& ball,
                             const Grid& grid, double p, double step = 0.0) {
  const double h = step > 0.0 ? step : 1e-4 * grid.box.diameter();
  const CellSet cells = cells_in_ball(grid, ball);
  const double dh_norm = lp_norm(cells, [&](const Point& q) { return dh_abs_at(rule, q, h); }, p);
  const double q_norm = lp_norm(cells, [&](const Point& q) { return q_abs_at(rule, q, h); }, p);
  double sup_u = 0.0;
  for (const auto& q : cells.centers) sup_u = std::max(sup_u, std::abs(rule(q)));
  const double denom = sup_u + q_norm;
  if (denom == 0.0) throw std::invalid_argument("coercive_ratio: u vanishes identically");
  return dh_norm / denom;
}

inline double coercive_ratio(const ComplexField& f, const Ball& ball, double p) {
  return coercive_ratio(f.rule, ball, f.grid, p, f.step);
}

/// Refusal: the pointwise inequality is only stated for orientation-preserving
/// quasi-isometries.
class OrientationRefusal : public std::runtime_error {
 public:
  explicit OrientationRefusal(Orientation o)
      : std::runtime_error(std::string("main inequality refused: KR-orientation is ") +
                           to_string(o)) {}
};

struct MainInequality {
  std::vector<double> residual;  // RHS - LHS per node, >= 0 up to scheme error
  std::vector<double> dev_norm;  // |D_h F - I| per node
  std::vector<std::uint8_t> valid;
  double eps_hat = 0.0;          // L_est - 1
  double min_residual = 0.0;
  double min_scaled_residual = 0.0;  // min of residual / (1 + |D_h F - I|^2)
};

/// Pointwise main inequality for the shifted map x -> x^{-1} F(x):
///   |Q u| <= eps(eps+2)/2 (|D_h F - I| + 2) + |D_h F - I|^2 / 2
/// with u the first complex coordinate of the shift, so D_h u = D_h F - I and
/// Q u is assembled from the same flow-difference differential.
inline MainInequality main_inequality_residual(const SampledMap& f, int workers = 1) {
  const QIReport rep = qi_report(f, workers);
  if (rep.orientation != Orientation::Preserving) throw OrientationRefusal(rep.orientation);
  const double eps = rep.l_est - 1.0;

  const HField field = dh(f, workers);
  MainInequality out;
  out.eps_hat = eps;
  out.residual.assign(field.m.size(), 0.0);
  out.dev_norm.assign(field.m.size(), 0.0);
  out.valid = field.valid;
  out.min_residual = std::numeric_limits<double>::infinity();
  out.min_scaled_residual = std::numeric_limits<double>::infinity();
  for (std::size_t li = 0; li < field.m.size(); ++li) {
    if (!field.valid[li]) continue;
    const Mat2 dev = field.m[li] - Mat2::identity();
    const double a = op_norm(dev);
    // Zu and Zbar u of the shifted first coordinate, from D_h u = D_h F - I
    const double sym = 0.5 * (dev.a11 + dev.a22);
    const Complex zbar{0.5 * (dev.a11 - dev.a22), 0.5 * (dev.a21 + dev.a12)};
    const double lhs = std::hypot(sym, std::abs(zbar));
    const double rhs = 0.5 * eps * (eps + 2.0) * (a + 2.0) + 0.5 * a * a;
    const double res = rhs - lhs;
    out.residual[li] = res;
    out.dev_norm[li] = a;
    out.min_residual = std::min(out.min_residual, res);
    out.min_scaled_residual = std::min(out.min_scaled_residual, res / (1.0 + a * a));
  }
  return out;
}

/// Best SO(2) approximation of a mean matrix (planar Procrustes).
inline Mat2 procrustes_rotation(const Mat2& mean) {
  const double theta = std::atan2(mean.a21 - mean.a12, mean.a11 + mean.a22);
  return Mat2::rotation(theta);
}

struct BsoReport {
  bool bso_pass = false;
  double worst_ball_ratio = 0.0;   // max over tested balls of the L_q mean deviation
  double exp_integral_ratio = 0.0; // (1/|U|) int exp((beta/alpha)^5 c2 |f - phi_B0| / sigma)
  double max_c2_for_16 = 0.0;      // largest c2 keeping the ratio <= 16
  std::size_t balls_tested = 0;
};

namespace detail {

/// Matrix value at a cell center: mean of the valid corner nodes.
inline bool cell_matrix(const HField& f, int ci, int cj, int ck, Mat2& out) {
  Mat2 acc{};
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj)
      for (int dk = 0; dk < 2; ++dk) {
        const std::size_t li = f.grid.index(ci + di, cj + dj, ck + dk);
        if (!f.valid[li]) return false;
        acc = acc + f.m[li];
      }
  out = acc * 0.125;
  return true;
}

struct MatrixCells {
  std::vector<Point> centers;
  std::vector<Mat2> values;
  double weight = 0.0;
};

inline MatrixCells matrix_cells(const HField& f) {
  MatrixCells mc;
  mc.weight = f.grid.cell_volume();
  for (int ci = 0; ci + 1 < f.grid.n[0]; ++ci)
    for (int cj = 0; cj + 1 < f.grid.n[1]; ++cj)
      for (int ck = 0; ck + 1 < f.grid.n[2]; ++ck) {
        Mat2 m;
        if (!cell_matrix(f, ci, cj, ck, m)) continue;
        const std::size_t cell =
            (static_cast<std::size_t>(ci) * (f.grid.n[1] - 1) + cj) * (f.grid.n[2] - 1) + ck;
        mc.centers.push_back(f.grid.cell_center(cell));
        mc.values.push_back(m);
      }
  return mc;
}

}  // namespace detail

/// Bounded-specific-oscillation check over a deterministic family of test
/// balls plus the exponential-integrability ratio against 16.
inline BsoReport bso_exp_check(const HField& field, const JohnDomain& domain, double q,
                               double sigma, double c2, double kappa = 2.0) {
  if (!(q > 1.0)) throw std::invalid_argument("bso_exp_check: need q > 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("bso_exp_check: need sigma > 0");
  const detail::MatrixCells cells = detail::matrix_cells(field);

  // deterministic test balls: distinguished point plus quasi-uniform centers,
  // radii as fractions of the boundary distance
  std::vector<Ball> balls;
  balls.push_back({domain.x_star, dist_to_boundary(domain, domain.x_star) / kappa, Metric::CC});
  for (const auto& c : sample_domain(domain, 8)) {
    const double du = dist_to_boundary(domain, c);
    for (double fr : {0.35, 0.7, 0.95}) balls.push_back({c, fr * du, Metric::CC});
  }

  BsoReport rep;
  auto ball_cells = [&](const Ball& b) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < cells.centers.size(); ++i)
      if (cc_dist(b.center, cells.centers[i]) < b.radius) idx.push_back(i);
    return idx;
  };
  Mat2 phi_b0 = Mat2::identity();
  bool pass = true;
  for (std::size_t bi = 0; bi < balls.size(); ++bi) {
    const auto idx = ball_cells(balls[bi]);
    if (idx.size() < 8) continue;  // ball too small for the grid resolution
    Mat2 mean{};
    for (auto i : idx) mean = mean + cells.values[i];
    mean = mean * (1.0 / static_cast<double>(idx.size()));
    const Mat2 phi = procrustes_rotation(mean);
    double acc = 0.0;
    for (auto i : idx) acc += std::pow(op_norm(cells.values[i] - phi), q);
    const double ratio = std::pow(acc / static_cast<double>(idx.size()), 1.0 / q);
    rep.worst_ball_ratio = std::max(rep.worst_ball_ratio, ratio);
    if (ratio > sigma) pass = false;
    ++rep.balls_tested;
    if (bi == 0) phi_b0 = phi;
  }
  rep.bso_pass = pass;

  // exponential integrability over the domain with the B_0 rotation
  std::vector<double> devs;
  double measure = 0.0;
  for (std::size_t i = 0; i < cells.centers.size(); ++i) {
    if (!domain_contains(domain, cells.centers[i])) continue;
    devs.push_back(op_norm(cells.values[i] - phi_b0));
    measure += cells.weight;
  }
  if (devs.empty()) throw std::domain_error("bso_exp_check: no cells inside the domain");
  const double ba5 = std::pow(domain.beta / domain.alpha, 5.0);
  auto exp_ratio = [&](double c) {
    double acc = 0.0;
    for (double v : devs) acc += std::exp(ba5 * c * v / sigma) * cells.weight;
    return acc / measure;
  };
  rep.exp_integral_ratio = exp_ratio(c2);

  double lo = 0.0, hi = 1.0;
  while (exp_ratio(hi) <= 16.0 && hi < 1e6) hi *= 2.0;
  if (hi >= 1e6) {
    rep.max_c2_for_16 = hi;
  } else {
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (exp_ratio(mid) <= 16.0 ? lo : hi) = mid;
    }
    rep.max_c2_for_16 = lo;
  }
  return rep;
}

}  // namespace heis
