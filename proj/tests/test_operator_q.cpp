#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "heis/operator_q.hpp"
#include "heis/sampling.hpp"

using namespace heis;

namespace {

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

Grid q_grid(int n = 9) { return Grid::cube({0, 0, 0}, 1.0, n); }

KernelParams random_params(Rng& rng) {
  return {{rng.uniform(-1, 1), rng.uniform(-1, 1)},
          rng.uniform(-1, 1),
          {rng.uniform(-1, 1), rng.uniform(-1, 1)}};
}

/// random complex polynomial field in (x, y, t), total degree <= 4
std::function<Complex(const Point&)> random_poly(Rng& rng) {
  struct Term {
    int i, j, k;
    Complex coeff;
  };
  std::vector<Term> terms;
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; i + j <= 4; ++j)
      for (int k = 0; i + j + k <= 4; ++k)
        terms.push_back({i, j, k, Complex(rng.normal(), rng.normal()) / 6.0});
  return [terms](const Point& p) {
    Complex acc{0.0, 0.0};
    for (const auto& t : terms)
      acc += t.coeff * std::pow(p.x, t.i) * std::pow(p.y, t.j) * std::pow(p.t, t.k);
    return acc;
  };
}

}  // namespace

TEST_CASE("q annihilates the kernel family", "[opq]") {
  const Grid g = q_grid();
  SECTION("constants and ikz") {
    CHECK(q_apply(kernel_field({{1, 0}, 0, {0, 0}}, g)).sup_abs() < 1e-11);
    CHECK(q_apply(kernel_field({{0, 0}, 1, {0, 0}}, g)).sup_abs() < 1e-11);
  }
  SECTION("kernel value example") {
    const auto rule = kernel_rule({{0, 0}, 0, {1, 0}});
    const Complex v = rule({1.0, 0.0, 2.0});
    CHECK(near(v.real(), 2.0, 1e-15));
    CHECK(near(v.imag(), 2.0, 1e-15));
  }
  SECTION("random kernel parameters") {
    Rng rng(51);
    for (int rep = 0; rep < 30; ++rep) {
      CHECK(q_apply(kernel_field(random_params(rng), g)).sup_abs() < 1e-11);
    }
  }
  SECTION("u = z is not in the kernel: Qu = (1, 0)") {
    const ComplexField f = make_complex_field([](const Point& p) { return p.z(); }, g);
    const QValues q = q_apply(f);
    for (std::size_t i = 0; i < q.sym.size(); ++i) {
      CHECK(near(q.sym[i], 1.0, 1e-10));
      CHECK(std::abs(q.zbar[i]) < 1e-10);
    }
  }
  SECTION("q_apply is linear") {
    Rng rng(52);
    const auto u = random_poly(rng);
    const auto v = random_poly(rng);
    const double a = 0.7, b = -1.3;
    const ComplexField fu = make_complex_field(u, g);
    const ComplexField fv = make_complex_field(v, g);
    const ComplexField fw =
        make_complex_field([&](const Point& p) { return a * u(p) + b * v(p); }, g);
    const QValues qu = q_apply(fu), qv = q_apply(fv), qw = q_apply(fw);
    for (std::size_t i = 0; i < qu.sym.size(); ++i) {
      CHECK(near(qw.sym[i], a * qu.sym[i] + b * qv.sym[i], 1e-9));
      CHECK(std::abs(qw.zbar[i] - (a * qu.zbar[i] + b * qv.zbar[i])) < 1e-9);
    }
  }
}

TEST_CASE("kernel projection", "[opq]") {
  const Grid g = Grid::cube({0, 0, 0}, 1.1, 17);
  const Ball ball{{0, 0, 0}, 1.0, Metric::CC};
  Rng rng(53);
  SECTION("projection fixes kernel fields") {
    for (int rep = 0; rep < 20; ++rep) {
      const KernelParams p = random_params(rng);
      const KernelParams q = project_kernel(kernel_rule(p), ball, g);
      CHECK(std::abs(q.a - p.a) < 1e-9);
      CHECK(near(q.k, p.k, 1e-9));
      CHECK(std::abs(q.b - p.b) < 1e-9);
    }
  }
  SECTION("projection is idempotent") {
    const auto u = random_poly(rng);
    const KernelParams p1 = project_kernel(u, ball, g);
    const KernelParams p2 = project_kernel(kernel_rule(p1), ball, g);
    CHECK(std::abs(p2.a - p1.a) < 1e-10);
    CHECK(near(p2.k, p1.k, 1e-10));
    CHECK(std::abs(p2.b - p1.b) < 1e-10);
  }
  SECTION("residual after subtracting the projection is kernel-orthogonal") {
    const auto u = random_poly(rng);
    const KernelParams p = project_kernel(u, ball, g);
    const auto ker = kernel_rule(p);
    const KernelParams res =
        project_kernel([&](const Point& q) { return u(q) - ker(q); }, ball, g);
    CHECK(std::abs(res.a) < 1e-9);
    CHECK(std::fabs(res.k) < 1e-9);
    CHECK(std::abs(res.b) < 1e-9);
  }
  SECTION("degree <= 2 polynomial annihilated by Q projects onto itself") {
    const KernelParams p{{0.3, -0.2}, 0.8, {0.1, 0.5}};
    const auto rule = kernel_rule(p);
    REQUIRE(q_apply(make_complex_field(rule, g)).sup_abs() < 1e-10);
    const KernelParams q = project_kernel(rule, ball, g);
    const Grid probe = Grid::cube({0, 0, 0}, 0.7, 5);
    const auto back = kernel_rule(q);
    for (std::size_t li = 0; li < probe.size(); ++li) {
      const Point x = probe.node(li);
      CHECK(std::abs(back(x) - rule(x)) < 1e-9);
    }
  }
}

TEST_CASE("coercive ratio", "[opq]") {
  const Grid g = Grid::cube({0, 0, 0}, 1.1, 17);
  const Ball ball{{0, 0, 0}, 1.0, Metric::CC};
  SECTION("tiny constants have zero ratio") {
    CHECK(coercive_ratio([](const Point&) { return Complex(1e-12, 0.0); }, ball, g, 2.0) <
          1e-6);
    CHECK_THROWS_AS(coercive_ratio([](const Point&) { return Complex(0.0, 0.0); }, ball, g, 2.0),
                    std::invalid_argument);
  }
  SECTION("u = z matches the direct quadrature value") {
    // D_h u = I and Qu = (1, 0), so the ratio is |B|^(1/2) / (sup|z| + |B|^(1/2))
    const CellSet cells = cells_in_ball(g, ball);
    const double vol = cells.measure();
    double supz = 0.0;
    for (const auto& c : cells.centers) supz = std::max(supz, std::abs(c.z()));
    const double expect = std::sqrt(vol) / (supz + std::sqrt(vol));
    const double got = coercive_ratio([](const Point& p) { return p.z(); }, ball, g, 2.0);
    CHECK(near(got, expect, 1e-6));
  }
  SECTION("randomized family: stable empirical constant, inequality holds") {
    auto family_max = [&](int count) {
      Rng rng(54);
      double cmax = 0.0;
      for (int i = 0; i < count; ++i)
        cmax = std::max(cmax, coercive_ratio(random_poly(rng), ball, g, 2.0));
      return cmax;
    };
    const double c200 = family_max(200);
    const double c400 = family_max(400);
    CHECK(std::isfinite(c400));
    CHECK(c400 >= c200);                       // same seed: the family is nested
    CHECK((c400 - c200) / c200 < 0.10);        // stable under doubling
    Rng rng(54);
    for (int i = 0; i < 50; ++i) {
      CHECK(coercive_ratio(random_poly(rng), ball, g, 2.0) <= c200 + 1e-12);
    }
  }
}

TEST_CASE("pointwise main inequality", "[opq]") {
  const Grid g = q_grid();
  SECTION("identity map gives zero residual") {
    const MainInequality r = main_inequality_residual(map_identity(g));
    CHECK(near(r.eps_hat, 0.0, 1e-12));
    CHECK(near(r.min_residual, 0.0, 1e-11));
  }
  SECTION("dilations satisfy the inequality at every node") {
    for (double eps : {0.01, 0.05, 0.1, 0.2}) {
      const MainInequality r = main_inequality_residual(map_dilation(1.0 + eps, g));
      CHECK(near(r.eps_hat, eps, 1e-9));
      CHECK(r.min_residual >= -1e-10);
    }
  }
  SECTION("contact flows satisfy the inequality") {
    for (double s : {0.1, 0.3, 0.6}) {
      Potential pot;
      pot.value = [](const Point& p) { return p.x * p.y; };
      const MainInequality r = main_inequality_residual(contact_flow_map(pot, s, 32, g, 4.0));
      CHECK(r.eps_hat <= 0.2);
      CHECK(r.min_scaled_residual >= -1e-8);
    }
  }
  SECTION("reflections are refused, not failed") {
    const SampledMap f = postcompose(iso_reflection(), map_dilation(1.05, g));
    CHECK_THROWS_AS(main_inequality_residual(f), OrientationRefusal);
  }
}

TEST_CASE("bso and exponential integrability", "[opq]") {
  const JohnDomain d = make_cc_ball_domain({0, 0, 0}, 1.0);
  const Grid g = Grid::cube({0, 0, 0}, 1.1, 17);
  SECTION("constant rotation field passes with tiny sigma") {
    const SampledMap f = map_from_isometry(iso_rotation(0.7), g);
    const BsoReport r = bso_exp_check(dh(f), d, 2.0, 1e-8, 1.0);
    CHECK(r.bso_pass);
    CHECK(r.worst_ball_ratio < 1e-9);
    CHECK(r.exp_integral_ratio < 16.0);
    CHECK(r.balls_tested >= 5);
  }
  SECTION("dilation field passes exactly when sigma covers eps") {
    const double eps = 0.05;
    const HField field = dh(map_dilation(1.0 + eps, g));
    const BsoReport pass = bso_exp_check(field, d, 2.0, eps * 1.01, 1.0);
    CHECK(pass.bso_pass);
    CHECK(near(pass.worst_ball_ratio, eps, 1e-6));
    const BsoReport fail = bso_exp_check(field, d, 2.0, eps * 0.9, 1.0);
    CHECK_FALSE(fail.bso_pass);
    // exp ratio with sigma slightly above eps: |field - I| / sigma is 1/1.01
    // everywhere and beta = alpha, so the largest admissible c2 is about ln 16
    CHECK(near(pass.max_c2_for_16, std::log(16.0) * 1.01, 0.02));
  }
  SECTION("one corrupted cell breaks the check for small sigma") {
    HField field = dh(map_identity(g));
    field.m[field.grid.index(8, 8, 8)] = Mat2::identity() * 11.0;
    const BsoReport r = bso_exp_check(field, d, 2.0, 0.01, 1.0);
    CHECK_FALSE(r.bso_pass);
  }
  SECTION("parameter validation") {
    const HField field = dh(map_identity(g));
    CHECK_THROWS_AS(bso_exp_check(field, d, 0.5, 0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(bso_exp_check(field, d, 2.0, 0.0, 1.0), std::invalid_argument);
  }
}
